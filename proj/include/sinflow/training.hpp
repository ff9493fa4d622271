#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sinflow/flow.hpp"
#include "sinflow/matrix.hpp"
#include "sinflow/patching.hpp"
#include "sinflow/rq_spline.hpp"
#include "sinflow/sliced_distance.hpp"

namespace sinflow {

/// Thrown by the 1D CDF estimators when a marginal has no usable spread;
/// callers treat the axis as already matched and skip it.
class DegenerateMarginalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CdfMethod : std::uint8_t { Quantile, Kde };

struct KdeConfig {
    double width_factor_b = 1.0;
    /// Overrides the Scott's-rule bandwidth when set (mainly for tests and
    /// degenerate data); the rule is b * N^{-0.2} * sigma_data otherwise.
    std::optional<double> explicit_width;
};

double kde_bandwidth(const KdeConfig& kde, std::size_t n, double sigma_data);

/// A 1D CDF estimate: an M-point summary table plus the retained sorted
/// sample so quantiles and tail fits can be computed exactly.
struct CdfEstimate {
    std::vector<double> support;     // ascending abscissae (tie-merged)
    std::vector<double> cdf_values;  // nondecreasing, in [0,1]
    CdfMethod method = CdfMethod::Quantile;
    std::vector<double> sorted_values;
    double bandwidth = 0.0;  // KDE only
};

/// Empirical CDF summarized at M evenly spaced quantile levels.
CdfEstimate estimate_cdf_quantile(std::span<const double> values, std::size_t m);

/// Gaussian-kernel mixture CDF evaluated on M support points spanning the
/// data range plus 4-sigma margins.
CdfEstimate estimate_cdf_kde(std::span<const double> values, std::size_t m,
                             const KdeConfig& kde);

double cdf_value_at(const CdfEstimate& est, double x);
double cdf_quantile_at(const CdfEstimate& est, double u);

enum class BoundaryPolicy : std::uint8_t {
    FixedUnitSlopes,  // SIG: endpoint derivatives and tail slopes fixed to 1
    FitTails,         // GIS: slopes fitted to the OT pairing of tail samples
};

/// Monotone 1D optimal transport map F_target^{-1}(F_source(x)) fitted as a
/// rational quadratic spline: knots pair the source and target quantiles at
/// matched CDF levels, derivatives from the local quadratic fit, identity
/// blend per the alpha = (a1, a2) regularization.
RegularizedMap fit_marginal_ot_map(const CdfEstimate& source, const CdfEstimate& target,
                                   std::size_t m, std::pair<double, double> alpha,
                                   BoundaryPolicy boundary);

enum class AxisSelection : std::uint8_t { Greedy, Random };

struct TrainConfig {
    std::size_t k = 1;             // axes per iteration
    std::size_t max_layers = 100;  // L_iter
    int stiefel_max_iter = 0;      // <= 0: Auto, max(1, floor(N/d))
    double alpha_spline = 0.0;     // a1 (GIS only; SIG always trains with 0)
    double alpha_tail = 0.0;       // a2
    int knot_count = 0;            // <= 0: Auto (400 for SIG; sqrt(N) in [50,200] for GIS)
    KdeConfig kde;
    std::optional<PatchSchedule> patch_schedule;
    double validation_fraction = 0.0;
    int patience = 20;  // <= 0 disables early stopping
    std::uint64_t rng_seed = 0;
    AxisSelection axes = AxisSelection::Greedy;
    LineSearchConfig line_search;
    double p = 2.0;
};

struct TrainReport {
    std::vector<double> objective_trace;  // max K-SWD at each iteration's axis selection
    std::vector<double> validation_logp;  // GIS: entry 0 is the empty flow
    std::vector<int> stiefel_iterations;
    std::size_t layers_built = 0;
    std::size_t degenerate_axes = 0;
    double wall_seconds = 0.0;
};

/// Per-iteration knobs for one greedy step (resolved from TrainConfig by the
/// trainers; exposed so single iterations can be driven directly).
struct IterationConfig {
    std::size_t k = 1;
    double p = 2.0;
    int stiefel_max_iter = 100;
    LineSearchConfig line_search;
    AxisSelection axes = AxisSelection::Greedy;
    CdfMethod method = CdfMethod::Quantile;
    KdeConfig kde;
    std::size_t knots = 400;
    std::pair<double, double> alpha{0.0, 0.0};
    BoundaryPolicy boundary = BoundaryPolicy::FixedUnitSlopes;
    std::uint64_t seed = 0;
    std::optional<PatchLayout> patch;  // pre-built layout including the shift
};

struct IterationResult {
    SinfLayer layer;
    double objective = 0.0;      // max K-SWD at axis selection (mean over patches)
    int stiefel_iterations = 0;  // max over patches
    std::size_t degenerate_axes = 0;
};

/// One SINF iteration: chooses the slice basis (max step), fits the per-axis
/// 1D OT maps (min step) and applies the resulting layer to `source` in
/// place. The max K-SWD along the chosen basis never increases.
IterationResult sinf_iteration(Matrix& source, const Matrix& target,
                               const IterationConfig& cfg);

/// Sliced Iterative Generator: iteratively transports standard-normal
/// samples onto the data distribution (quantile CDFs, unit tail slopes,
/// no regularization). Good for sampling.
std::pair<Flow, TrainReport> train_sig(const Dataset& data, const TrainConfig& cfg);

/// Gaussianizing Iterative Slicing: iteratively gaussianizes the data
/// (KDE CDFs, fitted tails, alpha regularization), early-stopping on the
/// validation mean log-likelihood. Good for density estimation.
std::pair<Flow, TrainReport> train_gis(const Dataset& data, const TrainConfig& cfg);

enum class PresetMode : std::uint8_t { HighAlpha, LowAlpha };

/// Small-dataset GIS configurations: K = min(8, d), 30% validation split,
/// HighAlpha: b = 1, alpha = (1 - 0.02 log10 N, 1 - 0.001 log10 N);
/// LowAlpha:  b = 2, alpha = (0, 1 - 0.01 log10 N).
TrainConfig small_data_presets(std::size_t n_train, std::size_t d, PresetMode mode);

int resolve_stiefel_max_iter(int configured, std::size_t n, std::size_t d);
std::size_t resolve_knot_count(int configured, std::size_t n, CdfMethod method);

}  // namespace sinflow
