#include "sinflow/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "sinflow/kernels.hpp"
#include "sinflow/rng.hpp"

namespace sinflow {
namespace {

constexpr double kKnotMergeTol = 1e-12;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double sample_std(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / std::max(n - 1.0, 1.0));
}

// Mixture CDF of Gaussian kernels at the sorted centers. Kernels beyond
// 7 sigma are counted as 0 or 1; that truncates the CDF error below 1e-11.
double kde_cdf(const std::vector<double>& sorted, double sigma, double x) {
    const double lo = x - 7.0 * sigma, hi = x + 7.0 * sigma;
    const auto begin = std::lower_bound(sorted.begin(), sorted.end(), lo);
    const auto end = std::upper_bound(sorted.begin(), sorted.end(), hi);
    double acc = static_cast<double>(begin - sorted.begin());
    for (auto it = begin; it != end; ++it) acc += normal_cdf((x - *it) / sigma);
    return acc / static_cast<double>(sorted.size());
}

double kde_pdf(const std::vector<double>& sorted, double sigma, double x) {
    const double lo = x - 7.0 * sigma, hi = x + 7.0 * sigma;
    const auto begin = std::lower_bound(sorted.begin(), sorted.end(), lo);
    const auto end = std::upper_bound(sorted.begin(), sorted.end(), hi);
    double acc = 0.0;
    for (auto it = begin; it != end; ++it) {
        const double z = (x - *it) / sigma;
        acc += std::exp(-0.5 * z * z);
    }
    return acc / (static_cast<double>(sorted.size()) * sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Empirical quantile, linear interpolation between order statistics.
double empirical_quantile(const std::vector<double>& sorted, double u) {
    const std::size_t n = sorted.size();
    const double h = std::clamp(u, 0.0, 1.0) * static_cast<double>(n - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(h), n - 2);
    const double frac = h - static_cast<double>(i);
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

double empirical_cdf(const std::vector<double>& sorted, double x) {
    const std::size_t n = sorted.size();
    if (x <= sorted.front()) return 0.0;
    if (x >= sorted.back()) return 1.0;
    const std::size_t j = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
    const std::size_t i = j - 1;
    const double gap = sorted[j] - sorted[i];
    const double frac = gap > 0.0 ? (x - sorted[i]) / gap : 0.0;
    return (static_cast<double>(i) + frac) / static_cast<double>(n - 1);
}

std::vector<double> sorted_copy(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

double kde_bandwidth(const KdeConfig& kde, std::size_t n, double sigma_data) {
    if (kde.explicit_width) return *kde.explicit_width;
    if (!(kde.width_factor_b > 0.0))
        throw std::invalid_argument("kde_bandwidth: width factor must be positive");
    return kde.width_factor_b * std::pow(static_cast<double>(n), -0.2) * sigma_data;
}

CdfEstimate estimate_cdf_quantile(std::span<const double> values, std::size_t m) {
    if (values.size() < 2) throw std::invalid_argument("estimate_cdf_quantile: need N >= 2");
    if (m < 2) throw std::invalid_argument("estimate_cdf_quantile: need M >= 2");
    CdfEstimate est;
    est.method = CdfMethod::Quantile;
    est.sorted_values = sorted_copy(values);
    if (!(est.sorted_values.back() > est.sorted_values.front()))
        throw DegenerateMarginalError("estimate_cdf_quantile: all values identical");
    for (std::size_t i = 0; i < m; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(m - 1);
        const double q = empirical_quantile(est.sorted_values, u);
        if (!est.support.empty() && q - est.support.back() <= kKnotMergeTol) {
            est.cdf_values.back() = u;  // merged tie keeps the upper level
            continue;
        }
        est.support.push_back(q);
        est.cdf_values.push_back(u);
    }
    return est;
}

CdfEstimate estimate_cdf_kde(std::span<const double> values, std::size_t m,
                             const KdeConfig& kde) {
    if (values.size() < 2) throw std::invalid_argument("estimate_cdf_kde: need N >= 2");
    if (m < 2) throw std::invalid_argument("estimate_cdf_kde: need M >= 2");
    CdfEstimate est;
    est.method = CdfMethod::Kde;
    est.sorted_values = sorted_copy(values);
    est.bandwidth = kde_bandwidth(kde, values.size(), sample_std(values));
    if (!(est.bandwidth > 0.0) || !std::isfinite(est.bandwidth))
        throw DegenerateMarginalError("estimate_cdf_kde: zero data variance");
    const double lo = est.sorted_values.front() - 4.0 * est.bandwidth;
    const double hi = est.sorted_values.back() + 4.0 * est.bandwidth;
    est.support.resize(m);
    est.cdf_values.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
        est.support[i] = x;
        est.cdf_values[i] = kde_cdf(est.sorted_values, est.bandwidth, x);
    }
    return est;
}

double cdf_value_at(const CdfEstimate& est, double x) {
    if (est.method == CdfMethod::Quantile) return empirical_cdf(est.sorted_values, x);
    return kde_cdf(est.sorted_values, est.bandwidth, x);
}

double cdf_quantile_at(const CdfEstimate& est, double u) {
    if (est.method == CdfMethod::Quantile) return empirical_quantile(est.sorted_values, u);

    // bracket from the precomputed support table, then safeguarded Newton
    if (u <= est.cdf_values.front()) return est.support.front();
    if (u >= est.cdf_values.back()) return est.support.back();
    const std::size_t j =
        std::upper_bound(est.cdf_values.begin(), est.cdf_values.end(), u) -
        est.cdf_values.begin();
    double lo = est.support[j - 1], hi = est.support[j];
    const double clo = est.cdf_values[j - 1], chi = est.cdf_values[j];
    double x = chi > clo ? lo + (hi - lo) * (u - clo) / (chi - clo) : 0.5 * (lo + hi);
    double step_prev = hi - lo, step = step_prev;
    for (int it = 0; it < 100; ++it) {
        const double f = kde_cdf(est.sorted_values, est.bandwidth, x) - u;
        if (std::abs(f) <= 1e-12) break;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        const double pdf = kde_pdf(est.sorted_values, est.bandwidth, x);
        step_prev = step;
        const double newton = pdf > 0.0 ? x - f / pdf : lo - 1.0;
        if (newton <= lo || newton >= hi || std::abs(2.0 * f) > std::abs(step_prev * pdf)) {
            step = 0.5 * (hi - lo);
            x = lo + step;
        } else {
            step = std::abs(newton - x);
            x = newton;
        }
        if (step <= 1e-13 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

namespace {

double fit_tail_slope(const CdfEstimate& src, const CdfEstimate& tgt, double x_edge,
                      double y_edge, bool left_tail, double fallback) {
    const auto& vals = src.sorted_values;
    std::size_t begin = 0, end = 0;
    if (left_tail) {
        end = std::lower_bound(vals.begin(), vals.end(), x_edge) - vals.begin();
    } else {
        begin = std::upper_bound(vals.begin(), vals.end(), x_edge) - vals.begin();
        end = vals.size();
    }
    if (end - begin < 2) return fallback;
    // least-squares slope through the boundary knot on the OT-paired tail;
    // large tails are strided down to 256 points
    const std::size_t count = end - begin;
    const std::size_t stride = std::max<std::size_t>(1, count / 256);
    double num = 0.0, den = 0.0;
    for (std::size_t i = begin; i < end; i += stride) {
        const double dx = vals[i] - x_edge;
        const double dy = cdf_quantile_at(tgt, cdf_value_at(src, vals[i])) - y_edge;
        num += dx * dy;
        den += dx * dx;
    }
    if (!(den > 0.0)) return fallback;
    const double slope = num / den;
    return (std::isfinite(slope) && slope > 1e-12) ? slope : fallback;
}

}  // namespace

RegularizedMap fit_marginal_ot_map(const CdfEstimate& source, const CdfEstimate& target,
                                   std::size_t m, std::pair<double, double> alpha,
                                   BoundaryPolicy boundary) {
    if (m < 2) throw std::invalid_argument("fit_marginal_ot_map: need M >= 2");

    // Quantile estimates are invertible on [0,1]; KDE estimates keep a level
    // margin so some samples fall outside the knot range for the tail fit.
    auto level_range = [m](const CdfEstimate& est) -> std::pair<double, double> {
        if (est.method == CdfMethod::Quantile) return {0.0, 1.0};
        const double margin = 1.0 / static_cast<double>(m + 1);
        return {std::max(margin, est.cdf_values.front()),
                std::min(1.0 - margin, est.cdf_values.back())};
    };
    const auto [slo, shi] = level_range(source);
    const auto [tlo, thi] = level_range(target);
    const double lo = std::max(slo, tlo), hi = std::min(shi, thi);
    if (!(hi > lo)) throw DegenerateMarginalError("fit_marginal_ot_map: empty level range");

    std::vector<double> xs, ys;
    xs.reserve(m);
    ys.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double u = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
        const double x = cdf_quantile_at(source, u);
        const double y = cdf_quantile_at(target, u);
        if (!xs.empty() && (x - xs.back() <= kKnotMergeTol || y - ys.back() <= kKnotMergeTol))
            continue;  // merge knots that would break strict monotonicity
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.size() < 2) throw DegenerateMarginalError("fit_marginal_ot_map: degenerate CDFs");

    std::vector<double> derivs = fit_knot_derivatives(xs, ys);
    double left = derivs.front(), right = derivs.back();
    if (boundary == BoundaryPolicy::FixedUnitSlopes) {
        left = right = 1.0;
    } else {
        const double s_first = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        const std::size_t last = xs.size() - 1;
        const double s_last = (ys[last] - ys[last - 1]) / (xs[last] - xs[last - 1]);
        left = fit_tail_slope(source, target, xs.front(), ys.front(), true, s_first);
        right = fit_tail_slope(source, target, xs.back(), ys.back(), false, s_last);
    }
    derivs.front() = left;
    derivs.back() = right;
    return make_regularized_map(make_rq_spline(std::move(xs), std::move(ys), std::move(derivs),
                                               left, right),
                                alpha.first, alpha.second);
}

namespace {

struct BlockFit {
    LayerBlock block;
    double objective = 0.0;
    int stiefel_iterations = 0;
    std::size_t degenerate_axes = 0;
};

BlockFit fit_block(const Matrix& src, const Matrix& tgt, const IterationConfig& cfg,
                   std::uint64_t seed) {
    const std::size_t d = src.cols();
    const std::size_t k = std::min(cfg.k, d);
    BlockFit fit;
    if (cfg.axes == AxisSelection::Greedy) {
        MaxSwdResult res =
            max_k_swd(src, tgt, k, cfg.p, cfg.stiefel_max_iter, cfg.line_search, seed);
        fit.block.basis = std::move(res.basis);
        fit.objective = res.distance;
        fit.stiefel_iterations = res.iterations_used;
    } else {
        fit.block.basis = random_orthonormal(d, k, seed);
        fit.objective = max_k_swd_objective(src, tgt, fit.block.basis, cfg.p);
    }

    const std::size_t n = src.rows();
    std::vector<double> ps(n), pt(n);
    const auto& ops = kernels::active();
    fit.block.maps.reserve(k);
    for (std::size_t a = 0; a < k; ++a) {
        ops.project_rows(src.data(), n, d, d, fit.block.basis.axis(a), ps.data());
        ops.project_rows(tgt.data(), n, d, d, fit.block.basis.axis(a), pt.data());
        try {
            CdfEstimate sc, tc;
            if (cfg.method == CdfMethod::Quantile) {
                sc = estimate_cdf_quantile(ps, cfg.knots);
                tc = estimate_cdf_quantile(pt, cfg.knots);
            } else {
                sc = estimate_cdf_kde(ps, cfg.knots, cfg.kde);
                tc = estimate_cdf_kde(pt, cfg.knots, cfg.kde);
            }
            fit.block.maps.push_back(
                fit_marginal_ot_map(sc, tc, cfg.knots, cfg.alpha, cfg.boundary));
        } catch (const DegenerateMarginalError&) {
            fit.block.maps.push_back(identity_map());
            ++fit.degenerate_axes;
        }
    }
    return fit;
}

}  // namespace

IterationResult sinf_iteration(Matrix& source, const Matrix& target,
                               const IterationConfig& cfg) {
    if (source.cols() != target.cols())
        throw std::invalid_argument("sinf_iteration: dimension mismatch");
    if (cfg.k < 1) throw std::invalid_argument("sinf_iteration: need K >= 1");

    IterationResult result;
    if (!cfg.patch) {
        BlockFit fit = fit_block(source, target, cfg, cfg.seed);
        result.objective = fit.objective;
        result.stiefel_iterations = fit.stiefel_iterations;
        result.degenerate_axes = fit.degenerate_axes;
        result.layer.blocks.push_back(std::move(fit.block));
    } else {
        const PatchLayout& layout = *cfg.patch;
        PatchSet src_set = gather_patches(layout, source);
        PatchSet tgt_set = gather_patches(layout, target);
        double obj_sum = 0.0;
        for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
            BlockFit fit = fit_block(src_set.patches[b], tgt_set.patches[b], cfg,
                                     mix_seed(cfg.seed, b));
            obj_sum += fit.objective;
            result.stiefel_iterations =
                std::max(result.stiefel_iterations, fit.stiefel_iterations);
            result.degenerate_axes += fit.degenerate_axes;
            result.layer.blocks.push_back(std::move(fit.block));
        }
        result.objective = obj_sum / static_cast<double>(layout.blocks.size());
        result.layer.patch = layout;
    }
    layer_forward_inplace(result.layer, source, nullptr);
    return result;
}

namespace {

struct IterPlanEntry {
    std::size_t k = 1;
    std::optional<PatchStage> stage;
};

std::vector<IterPlanEntry> build_plan(const Dataset& data, const TrainConfig& cfg) {
    std::vector<IterPlanEntry> plan;
    if (cfg.patch_schedule && !cfg.patch_schedule->empty()) {
        if (!data.image)
            throw std::invalid_argument("patch schedule requires image-shaped data");
        if (data.image->flat_dim() != data.data.cols())
            throw std::invalid_argument("image shape does not match data dimension");
        for (const PatchStage& stage : *cfg.patch_schedule) {
            for (std::size_t i = 0; i < stage.iterations; ++i) plan.push_back({stage.axes, stage});
        }
    } else {
        for (std::size_t i = 0; i < cfg.max_layers; ++i) plan.push_back({cfg.k, std::nullopt});
    }
    return plan;
}

IterationConfig iteration_config(const TrainConfig& cfg, const IterPlanEntry& entry,
                                 const Dataset& data, std::size_t n_train, CdfMethod method,
                                 BoundaryPolicy boundary, std::pair<double, double> alpha,
                                 std::size_t iteration_index) {
    IterationConfig ic;
    ic.k = entry.k;
    ic.p = cfg.p;
    ic.line_search = cfg.line_search;
    ic.axes = cfg.axes;
    ic.method = method;
    ic.kde = cfg.kde;
    ic.knots = resolve_knot_count(cfg.knot_count, n_train, method);
    ic.alpha = alpha;
    ic.boundary = boundary;
    ic.seed = mix_seed(cfg.rng_seed, 1000 + iteration_index);

    std::size_t block_dim = data.data.cols();
    if (entry.stage) {
        const ImageShape& shape = *data.image;
        Rng shift_rng(mix_seed(cfg.rng_seed, 2000 + iteration_index));
        std::uniform_int_distribution<std::size_t> shift(0, shape.side - 1);
        const std::size_t dy = shift(shift_rng), dx = shift(shift_rng);
        ic.patch = make_layout(shape.side, shape.channels, entry.stage->patch_side, dy, dx,
                               entry.stage->single_channel);
        block_dim = ic.patch->block_dim();
        ic.k = std::min(entry.k, block_dim);
    }
    ic.stiefel_max_iter = resolve_stiefel_max_iter(cfg.stiefel_max_iter, n_train, block_dim);
    return ic;
}

void warn_degenerate(std::size_t iteration, std::size_t count) {
    if (count > 0)
        std::fprintf(stderr, "sinf: iteration %zu: skipped %zu degenerate axis(es)\n",
                     iteration, count);
}

}  // namespace

std::pair<Flow, TrainReport> train_sig(const Dataset& data, const TrainConfig& cfg) {
    const std::size_t n = data.data.rows(), d = data.data.cols();
    if (n < 2) throw std::invalid_argument("train_sig: need at least 2 samples");
    const auto start = std::chrono::steady_clock::now();

    Flow flow;
    flow.direction = FlowDirection::SIG;
    flow.dim = d;
    flow.image = data.image;

    TrainReport report;
    Matrix source = gaussian_matrix(n, d, mix_seed(cfg.rng_seed, 0x51));
    const std::vector<IterPlanEntry> plan = build_plan(data, cfg);
    for (std::size_t l = 0; l < plan.size(); ++l) {
        // SIG always trains unregularized with quantile CDFs and unit tails
        IterationConfig ic = iteration_config(cfg, plan[l], data, n, CdfMethod::Quantile,
                                              BoundaryPolicy::FixedUnitSlopes, {0.0, 0.0}, l);
        IterationResult res = sinf_iteration(source, data.data, ic);
        warn_degenerate(l, res.degenerate_axes);
        report.objective_trace.push_back(res.objective);
        report.stiefel_iterations.push_back(res.stiefel_iterations);
        report.degenerate_axes += res.degenerate_axes;
        flow.layers.push_back(std::move(res.layer));
    }
    report.layers_built = flow.layers.size();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                              .count();
    return {std::move(flow), std::move(report)};
}

std::pair<Flow, TrainReport> train_gis(const Dataset& data, const TrainConfig& cfg) {
    const std::size_t n = data.data.rows(), d = data.data.cols();
    if (n < 2) throw std::invalid_argument("train_gis: need at least 2 samples");
    if (!(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0))
        throw std::invalid_argument("train_gis: validation_fraction must be in [0,1)");
    const auto start = std::chrono::steady_clock::now();

    // deterministic shuffled split
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(mix_seed(cfg.rng_seed, 0x52));
    std::shuffle(order.begin(), order.end(), split_rng);
    const std::size_t n_val = static_cast<std::size_t>(cfg.validation_fraction *
                                                       static_cast<double>(n));
    const std::size_t n_train = n - n_val;
    if (n_train < 2) throw std::invalid_argument("train_gis: training split too small");
    if (cfg.patience > 0 && n_val == 0)
        throw std::invalid_argument("train_gis: early stopping needs a validation split");

    Matrix train(n_train, d), val(n_val, d);
    for (std::size_t i = 0; i < n_train; ++i)
        std::copy(data.data.row(order[i]), data.data.row(order[i]) + d, train.row(i));
    for (std::size_t i = 0; i < n_val; ++i)
        std::copy(data.data.row(order[n_train + i]), data.data.row(order[n_train + i]) + d,
                  val.row(i));

    // Gaussian target samples, fixed for the whole run
    Matrix target = gaussian_matrix(n_train, d, mix_seed(cfg.rng_seed, 0x53));

    Flow flow;
    flow.direction = FlowDirection::GIS;
    flow.dim = d;
    flow.image = data.image;

    TrainReport report;
    // validation samples are transformed incrementally alongside the flow
    Matrix val_z = val;
    std::vector<double> val_logjac(n_val, 0.0);
    auto validation_mean_logp = [&]() {
        double acc = 0.0;
        for (std::size_t i = 0; i < n_val; ++i)
            acc += standard_normal_logpdf(val_z.row_span(i)) + val_logjac[i];
        return acc / static_cast<double>(n_val);
    };

    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_layers = 0;
    if (n_val > 0) {
        best = validation_mean_logp();
        report.validation_logp.push_back(best);
    }

    const std::vector<IterPlanEntry> plan = build_plan(data, cfg);
    const std::pair<double, double> alpha{cfg.alpha_spline, cfg.alpha_tail};
    for (std::size_t l = 0; l < plan.size(); ++l) {
        IterationConfig ic = iteration_config(cfg, plan[l], data, n_train, CdfMethod::Kde,
                                              BoundaryPolicy::FitTails, alpha, l);
        IterationResult res = sinf_iteration(train, target, ic);
        warn_degenerate(l, res.degenerate_axes);
        report.objective_trace.push_back(res.objective);
        report.stiefel_iterations.push_back(res.stiefel_iterations);
        report.degenerate_axes += res.degenerate_axes;
        flow.layers.push_back(std::move(res.layer));

        if (n_val > 0) {
            layer_forward_inplace(flow.layers.back(), val_z, &val_logjac);
            const double v = validation_mean_logp();
            report.validation_logp.push_back(v);
            if (v > best) {
                best = v;
                best_layers = flow.layers.size();
            } else if (cfg.patience > 0 &&
                       flow.layers.size() - best_layers >=
                           static_cast<std::size_t>(cfg.patience)) {
                break;
            }
        }
    }
    // keep the model at its best validation log-likelihood
    if (n_val > 0 && cfg.patience > 0) flow.layers.resize(best_layers);
    report.layers_built = flow.layers.size();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                              .count();
    return {std::move(flow), std::move(report)};
}

TrainConfig small_data_presets(std::size_t n_train, std::size_t d, PresetMode mode) {
    if (n_train < 10) throw std::invalid_argument("small_data_presets: need N >= 10");
    if (d < 1) throw std::invalid_argument("small_data_presets: need d >= 1");
    TrainConfig cfg;
    cfg.k = std::min<std::size_t>(8, d);
    cfg.max_layers = 800;
    cfg.validation_fraction = 0.3;
    cfg.patience = 20;
    const double lg = std::log10(static_cast<double>(n_train));
    if (mode == PresetMode::HighAlpha) {
        cfg.kde.width_factor_b = 1.0;
        cfg.alpha_spline = 1.0 - 0.02 * lg;
        cfg.alpha_tail = 1.0 - 0.001 * lg;
    } else {
        cfg.kde.width_factor_b = 2.0;
        cfg.alpha_spline = 0.0;
        cfg.alpha_tail = 1.0 - 0.01 * lg;
    }
    return cfg;
}

int resolve_stiefel_max_iter(int configured, std::size_t n, std::size_t d) {
    if (configured > 0) return configured;
    return std::max<int>(1, static_cast<int>(n / std::max<std::size_t>(d, 1)));
}

std::size_t resolve_knot_count(int configured, std::size_t n, CdfMethod method) {
    if (configured >= 2) return static_cast<std::size_t>(configured);
    if (method == CdfMethod::Quantile) return 400;
    const double m = std::round(std::sqrt(static_cast<double>(n)));
    return static_cast<std::size_t>(std::clamp(m, 50.0, 200.0));
}

}  // namespace sinflow
