#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sinflow/matrix.hpp"
#include "sinflow/patching.hpp"
#include "sinflow/rq_spline.hpp"
#include "sinflow/sliced_distance.hpp"

namespace sinflow {

/// One iteration's transform restricted to a block of coordinates: a slice
/// basis plus one monotone 1D map per axis. Components orthogonal to the
/// axes are unchanged:  x' = A Psi(A^T x) + (x - A A^T x).
struct LayerBlock {
    SliceBasis basis;
    std::vector<RegularizedMap> maps;  // one per axis
};

/// A full iteration. Unpatched layers have a single block acting on all d
/// coordinates; patched layers carry the layout (including the recorded
/// periodic shift) and one independent block per patch.
struct SinfLayer {
    std::vector<LayerBlock> blocks;
    std::optional<PatchLayout> patch;
};

enum class FlowDirection : std::uint8_t { SIG = 0, GIS = 1 };

/// Layers in training order plus the direction they were trained in.
/// SIG layers map latent -> data, GIS layers map data -> latent; density
/// evaluation and sampling derive their traversal order from the tag.
struct Flow {
    FlowDirection direction = FlowDirection::GIS;
    std::size_t dim = 0;
    std::optional<ImageShape> image;
    std::vector<SinfLayer> layers;
};

struct LogDensityReport {
    double logp = 0.0;
    double log_jacobian = 0.0;  // log |det df/dx| for f: data -> latent
    double base_logp = 0.0;     // standard normal log-density at f(x)
};

/// Applies the layer as stored. Adds each sample's log-Jacobian
/// (sum_k log psi_k'(theta_k . x)) to `logjac` when non-null.
void layer_forward_inplace(const SinfLayer& layer, Matrix& x, std::vector<double>* logjac);

/// Applies the layer's inverse. Adds the inverse map's log-Jacobian
/// (negative of the forward one at the matching point) to `logjac`.
void layer_inverse_inplace(const SinfLayer& layer, Matrix& x, std::vector<double>* logjac);

std::pair<Matrix, std::vector<double>> layer_forward(const SinfLayer& layer, const Matrix& x);
Matrix layer_inverse(const SinfLayer& layer, const Matrix& x);

/// Transforms samples to the latent space, accumulating log |det df/dx|.
void flow_to_latent(const Flow& flow, Matrix& x, std::vector<double>* logjac);
/// Inverse of flow_to_latent.
void flow_to_data(const Flow& flow, Matrix& z, std::vector<double>* logjac);

/// Exact log-density by the change of variables through the flow.
/// For SIG flows this traverses the stored layers inverted; the estimate is
/// exact for the model but SIG training does not target log p, so treat it
/// as a score rather than a calibrated density.
LogDensityReport flow_log_density(const Flow& flow, std::span<const double> x);
std::vector<LogDensityReport> flow_log_density(const Flow& flow, const Matrix& x);

/// Draws n samples by pushing z ~ N(0, T^2 I_d) through the flow.
/// T = 1 samples the model distribution.
Matrix flow_sample(const Flow& flow, std::size_t n, double temperature, std::uint64_t rng_seed);

/// log N(x; 0, I_d)
double standard_normal_logpdf(std::span<const double> x);

}  // namespace sinflow
