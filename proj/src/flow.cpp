#include "sinflow/flow.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sinflow/kernels.hpp"
#include "sinflow/rng.hpp"

namespace sinflow {
namespace {

std::size_t layer_dim(const SinfLayer& layer) {
    if (layer.patch) return layer.patch->side * layer.patch->side * layer.patch->channels;
    return layer.blocks.at(0).basis.dim();
}

// Applies one block in place. `x` is the block-local matrix (N x dims).
void apply_block(const LayerBlock& block, Matrix& x, std::vector<double>* logjac, bool inverse) {
    const std::size_t n = x.rows(), d = x.cols(), kk = block.basis.num_axes();
    if (block.basis.dim() != d) throw std::invalid_argument("layer block dimension mismatch");
    if (block.maps.size() != kk) throw std::invalid_argument("layer block has wrong map count");

    const auto& ops = kernels::active();
    Matrix proj(n, kk);   // t_ik = theta_k . x_i, column k per axis
    Matrix delta(n, kk);  // psi_k(t_ik) - t_ik
    std::vector<double> t(n);
    for (std::size_t k = 0; k < kk; ++k) {
        ops.project_rows(x.data(), n, d, d, block.basis.axis(k), t.data());
        const RegularizedMap& map = block.maps[k];
        for (std::size_t i = 0; i < n; ++i) {
            const double u = inverse ? map_inverse(map, t[i]) : map_forward(map, t[i]);
            proj(i, k) = u;
            delta(i, k) = u - t[i];
        }
        if (logjac) {
            // forward Jacobian factor is psi'(t); the inverse contributes
            // -log psi' evaluated at the preimage
            for (std::size_t i = 0; i < n; ++i) {
                const double der = map_derivative(map, inverse ? proj(i, k) : t[i]);
                (*logjac)[i] += inverse ? -std::log(der) : std::log(der);
            }
        }
    }
    ops.rank_update_rows(x.data(), n, d, d, delta.data(), kk, block.basis.axes.data(), kk);
}

void apply_layer(const SinfLayer& layer, Matrix& x, std::vector<double>* logjac, bool inverse) {
    if (x.cols() != layer_dim(layer))
        throw std::invalid_argument("layer dimension does not match data");
    if (logjac && logjac->size() != x.rows())
        throw std::invalid_argument("log-Jacobian accumulator has wrong length");

    if (!layer.patch) {
        apply_block(layer.blocks.at(0), x, logjac, inverse);
        return;
    }
    const PatchLayout& layout = *layer.patch;
    if (layer.blocks.size() != layout.blocks.size())
        throw std::invalid_argument("patched layer: block count does not match layout");
    Matrix local;
    for (std::size_t b = 0; b < layer.blocks.size(); ++b) {
        const auto& idx = layout.blocks[b];
        local = Matrix(x.rows(), idx.size());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double* src = x.row(i);
            double* dst = local.row(i);
            for (std::size_t j = 0; j < idx.size(); ++j) dst[j] = src[idx[j]];
        }
        apply_block(layer.blocks[b], local, logjac, inverse);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double* src = local.row(i);
            double* dst = x.row(i);
            for (std::size_t j = 0; j < idx.size(); ++j) dst[idx[j]] = src[j];
        }
    }
}

}  // namespace

void layer_forward_inplace(const SinfLayer& layer, Matrix& x, std::vector<double>* logjac) {
    apply_layer(layer, x, logjac, /*inverse=*/false);
}

void layer_inverse_inplace(const SinfLayer& layer, Matrix& x, std::vector<double>* logjac) {
    apply_layer(layer, x, logjac, /*inverse=*/true);
}

std::pair<Matrix, std::vector<double>> layer_forward(const SinfLayer& layer, const Matrix& x) {
    Matrix out = x;
    std::vector<double> logjac(x.rows(), 0.0);
    layer_forward_inplace(layer, out, &logjac);
    return {std::move(out), std::move(logjac)};
}

Matrix layer_inverse(const SinfLayer& layer, const Matrix& x) {
    Matrix out = x;
    layer_inverse_inplace(layer, out, nullptr);
    return out;
}

void flow_to_latent(const Flow& flow, Matrix& x, std::vector<double>* logjac) {
    if (x.cols() != flow.dim) throw std::invalid_argument("flow dimension mismatch");
    if (flow.direction == FlowDirection::GIS) {
        for (const SinfLayer& layer : flow.layers) layer_forward_inplace(layer, x, logjac);
    } else {
        for (auto it = flow.layers.rbegin(); it != flow.layers.rend(); ++it)
            layer_inverse_inplace(*it, x, logjac);
    }
}

void flow_to_data(const Flow& flow, Matrix& z, std::vector<double>* logjac) {
    if (z.cols() != flow.dim) throw std::invalid_argument("flow dimension mismatch");
    if (flow.direction == FlowDirection::GIS) {
        for (auto it = flow.layers.rbegin(); it != flow.layers.rend(); ++it)
            layer_inverse_inplace(*it, z, logjac);
    } else {
        for (const SinfLayer& layer : flow.layers) layer_forward_inplace(layer, z, logjac);
    }
}

double standard_normal_logpdf(std::span<const double> x) {
    const double log_two_pi = std::log(2.0 * std::numbers::pi);
    double acc = 0.0;
    for (double v : x) acc += -0.5 * (v * v + log_two_pi);
    return acc;
}

std::vector<LogDensityReport> flow_log_density(const Flow& flow, const Matrix& x) {
    if (x.cols() != flow.dim) throw std::invalid_argument("flow dimension mismatch");
    if (!x.all_finite()) throw std::invalid_argument("flow_log_density: non-finite input");
    Matrix z = x;
    std::vector<double> logjac(x.rows(), 0.0);
    flow_to_latent(flow, z, &logjac);
    std::vector<LogDensityReport> reports(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        LogDensityReport& r = reports[i];
        r.base_logp = standard_normal_logpdf(z.row_span(i));
        r.log_jacobian = logjac[i];
        r.logp = r.base_logp + r.log_jacobian;
    }
    return reports;
}

LogDensityReport flow_log_density(const Flow& flow, std::span<const double> x) {
    Matrix m(1, x.size());
    std::copy(x.begin(), x.end(), m.row(0));
    return flow_log_density(flow, m).front();
}

Matrix flow_sample(const Flow& flow, std::size_t n, double temperature, std::uint64_t rng_seed) {
    if (n < 1) throw std::invalid_argument("flow_sample: need n >= 1");
    if (!(temperature > 0.0)) throw std::invalid_argument("flow_sample: temperature must be > 0");
    Matrix z = gaussian_matrix(n, flow.dim, rng_seed);
    if (temperature != 1.0)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < flow.dim; ++j) z(i, j) *= temperature;
    flow_to_data(flow, z, nullptr);
    return z;
}

}  // namespace sinflow
