#include "sinflow/sliced_distance.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sinflow/kernels.hpp"
#include "sinflow/rng.hpp"

namespace sinflow {
namespace {

using EMatrix = Eigen::MatrixXd;

EMatrix to_eigen_cols(const Matrix& axes_t) {
    // row-per-axis storage -> d x K column-per-axis matrix
    EMatrix a(axes_t.cols(), axes_t.rows());
    for (std::size_t k = 0; k < axes_t.rows(); ++k)
        for (std::size_t j = 0; j < axes_t.cols(); ++j) a(j, k) = axes_t(k, j);
    return a;
}

SliceBasis from_eigen_cols(const EMatrix& a) {
    SliceBasis basis;
    basis.axes = Matrix(a.cols(), a.rows());
    for (Eigen::Index k = 0; k < a.cols(); ++k)
        for (Eigen::Index j = 0; j < a.rows(); ++j) basis.axes(k, j) = a(j, k);
    return basis;
}

void check_pair(const Matrix& x, const Matrix& y) {
    if (x.cols() != y.cols())
        throw std::invalid_argument("sample sets have different dimensionality");
    if (x.rows() != y.rows())
        throw std::invalid_argument(
            "sample sets must have equal sample counts (subsample_rows the larger one)");
    if (x.rows() == 0) throw std::invalid_argument("empty sample set");
}

double mean_abs_pow(const double* a, const double* b, std::size_t n, double p) {
    if (p == 2.0) return kernels::active().sq_diff_sum(a, b, n) / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::pow(std::abs(a[i] - b[i]), p);
    return acc / static_cast<double>(n);
}

// Scratch buffers for repeated objective/gradient evaluations.
struct Workspace {
    std::vector<double> px, py;
    std::vector<std::uint32_t> ix, iy;
    std::vector<double> w;

    void resize(std::size_t n) {
        px.resize(n);
        py.resize(n);
    }
};

// p-th-power objective D = (1/(KN)) sum_k sum_n |xhat_(n) - yhat_(n)|^p.
double objective_pow(const Matrix& x, const Matrix& y, const SliceBasis& basis, double p,
                     Workspace& ws) {
    const std::size_t n = x.rows(), d = x.cols(), kk = basis.num_axes();
    ws.resize(n);
    const auto& ops = kernels::active();
    double total = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
        ops.project_rows(x.data(), n, d, d, basis.axis(k), ws.px.data());
        ops.project_rows(y.data(), n, d, d, basis.axis(k), ws.py.data());
        std::sort(ws.px.begin(), ws.px.end());
        std::sort(ws.py.begin(), ws.py.end());
        total += mean_abs_pow(ws.px.data(), ws.py.data(), n, p);
    }
    return total / static_cast<double>(kk);
}

void argsort_stable(const std::vector<double>& v, std::vector<std::uint32_t>& idx) {
    idx.resize(v.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
}

Matrix gradient_impl(const Matrix& x, const Matrix& y, const SliceBasis& basis, double p,
                     Workspace& ws) {
    const std::size_t n = x.rows(), d = x.cols(), kk = basis.num_axes();
    ws.resize(n);
    ws.w.resize(n);
    const auto& ops = kernels::active();
    Matrix grad(kk, d, 0.0);
    const double scale = p / (static_cast<double>(kk) * static_cast<double>(n));
    for (std::size_t k = 0; k < kk; ++k) {
        ops.project_rows(x.data(), n, d, d, basis.axis(k), ws.px.data());
        ops.project_rows(y.data(), n, d, d, basis.axis(k), ws.py.data());
        argsort_stable(ws.px, ws.ix);
        argsort_stable(ws.py, ws.iy);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ws.px[ws.ix[i]] - ws.py[ws.iy[i]];
            double w = (p == 2.0) ? r : std::pow(std::abs(r), p - 1.0) * (r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0));
            ws.w[i] = scale * w;
        }
        ops.weighted_perm_rowsum(x.data(), d, ws.ix.data(), ws.w.data(), n, d, grad.row(k));
        for (std::size_t i = 0; i < n; ++i) ws.w[i] = -ws.w[i];
        ops.weighted_perm_rowsum(y.data(), d, ws.iy.data(), ws.w.data(), n, d, grad.row(k));
    }
    return grad;
}

void check_retract_inputs(const SliceBasis& basis, const Matrix& g, double tau) {
    if (g.rows() != basis.num_axes() || g.cols() != basis.dim())
        throw std::invalid_argument("gradient shape does not match basis");
    if (!(tau >= 0.0)) throw std::invalid_argument("retraction step must be >= 0");
}

SliceBasis finish_retract(const EMatrix& a_next) {
    if (!a_next.allFinite())
        throw std::runtime_error("cayley retraction: step too large (singular system)");
    SliceBasis next = from_eigen_cols(a_next);
    if (!next.is_orthonormal(1e-8))
        throw std::runtime_error("cayley retraction: step too large (orthonormality lost)");
    return next;
}

}  // namespace

double SliceBasis::orthonormality_error() const {
    const std::size_t kk = num_axes(), d = dim();
    const auto& ops = kernels::active();
    double worst = 0.0;
    for (std::size_t a = 0; a < kk; ++a)
        for (std::size_t b = a; b < kk; ++b) {
            const double g = ops.dot(axes.row(a), axes.row(b), d) - (a == b ? 1.0 : 0.0);
            worst = std::max(worst, std::abs(g));
        }
    return worst;
}

double wasserstein_1d(std::span<const double> xs, std::span<const double> ys, double p) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("wasserstein_1d: input lengths differ");
    if (xs.empty()) throw std::invalid_argument("wasserstein_1d: empty input");
    if (!(p >= 1.0)) throw std::invalid_argument("wasserstein_1d: order p must be >= 1");
    for (double v : xs)
        if (!std::isfinite(v)) throw std::invalid_argument("wasserstein_1d: non-finite input");
    for (double v : ys)
        if (!std::isfinite(v)) throw std::invalid_argument("wasserstein_1d: non-finite input");

    std::vector<double> a(xs.begin(), xs.end()), b(ys.begin(), ys.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return std::pow(mean_abs_pow(a.data(), b.data(), a.size(), p), 1.0 / p);
}

double sliced_wasserstein(const Matrix& x, const Matrix& y, int n_projections, double p,
                          std::uint64_t rng_seed) {
    check_pair(x, y);
    if (n_projections < 1) throw std::invalid_argument("sliced_wasserstein: n_projections < 1");

    const std::size_t n = x.rows(), d = x.cols();
    Rng rng(rng_seed);
    std::normal_distribution<double> normal;
    std::vector<double> theta(d), px(n), py(n);
    const auto& ops = kernels::active();
    double total = 0.0;
    for (int j = 0; j < n_projections; ++j) {
        double norm = 0.0;
        do {
            norm = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                theta[i] = normal(rng);
                norm += theta[i] * theta[i];
            }
            norm = std::sqrt(norm);
        } while (norm < 1e-12);
        for (std::size_t i = 0; i < d; ++i) theta[i] /= norm;
        ops.project_rows(x.data(), n, d, d, theta.data(), px.data());
        ops.project_rows(y.data(), n, d, d, theta.data(), py.data());
        std::sort(px.begin(), px.end());
        std::sort(py.begin(), py.end());
        total += mean_abs_pow(px.data(), py.data(), n, p);
    }
    return std::pow(total / n_projections, 1.0 / p);
}

double max_k_swd_objective(const Matrix& x, const Matrix& y, const SliceBasis& basis, double p) {
    check_pair(x, y);
    if (basis.dim() != x.cols()) throw std::invalid_argument("basis dimension mismatch");
    Workspace ws;
    return std::pow(objective_pow(x, y, basis, p, ws), 1.0 / p);
}

Matrix objective_gradient(const Matrix& x, const Matrix& y, const SliceBasis& basis, double p) {
    check_pair(x, y);
    if (basis.dim() != x.cols()) throw std::invalid_argument("basis dimension mismatch");
    Workspace ws;
    return gradient_impl(x, y, basis, p, ws);
}

SliceBasis random_orthonormal(std::size_t d, std::size_t k, std::uint64_t rng_seed) {
    if (k < 1 || k > d) throw std::invalid_argument("random_orthonormal: need 1 <= K <= d");
    Rng rng(rng_seed);
    std::normal_distribution<double> normal;
    EMatrix gauss(d, k);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t c = 0; c < k; ++c) gauss(j, c) = normal(rng);
    Eigen::HouseholderQR<EMatrix> qr(gauss);
    EMatrix q = qr.householderQ() * EMatrix::Identity(d, k);
    EMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    // fix column signs so the distribution is Haar rather than QR-convention
    for (std::size_t c = 0; c < k; ++c)
        if (r(c, c) < 0) q.col(c) = -q.col(c);
    return from_eigen_cols(q);
}

SliceBasis cayley_retract_full(const SliceBasis& basis, const Matrix& g, double tau) {
    check_retract_inputs(basis, g, tau);
    const auto d = static_cast<Eigen::Index>(basis.dim());
    EMatrix a = to_eigen_cols(basis.axes);
    EMatrix gm = to_eigen_cols(g);
    EMatrix b = gm * a.transpose() - a * gm.transpose();
    EMatrix lhs = EMatrix::Identity(d, d) + (tau / 2.0) * b;
    EMatrix rhs = (EMatrix::Identity(d, d) - (tau / 2.0) * b) * a;
    return finish_retract(lhs.partialPivLu().solve(rhs));
}

SliceBasis cayley_retract_woodbury(const SliceBasis& basis, const Matrix& g, double tau) {
    check_retract_inputs(basis, g, tau);
    const auto kk = static_cast<Eigen::Index>(basis.num_axes());
    EMatrix a = to_eigen_cols(basis.axes);
    EMatrix gm = to_eigen_cols(g);
    EMatrix u(a.rows(), 2 * kk), v(a.rows(), 2 * kk);
    u << gm, a;
    v << a, -gm;
    EMatrix s = EMatrix::Identity(2 * kk, 2 * kk) + (tau / 2.0) * (v.transpose() * u);
    EMatrix z = s.partialPivLu().solve(v.transpose() * a);
    return finish_retract(a - tau * (u * z));
}

MaxSwdResult max_k_swd(const Matrix& x, const Matrix& y, std::size_t k, double p, int max_iter,
                       const LineSearchConfig& ls, std::uint64_t rng_seed) {
    check_pair(x, y);
    if (k < 1 || k > x.cols()) throw std::invalid_argument("max_k_swd: need 1 <= K <= d");
    if (max_iter < 1) throw std::invalid_argument("max_k_swd: max_iter must be >= 1");
    if (!(p >= 1.0)) throw std::invalid_argument("max_k_swd: order p must be >= 1");

    Workspace ws;
    MaxSwdResult res;
    res.basis = random_orthonormal(x.cols(), k, rng_seed);
    double obj = objective_pow(x, y, res.basis, p, ws);
    res.objective_trace.push_back(obj);

    for (int j = 1; j <= max_iter; ++j) {
        res.iterations_used = j;
        Matrix grad = gradient_impl(x, y, res.basis, p, ws);
        // ascent: Algorithm feeds the negated gradient into the Cayley curve
        for (std::size_t i = 0; i < grad.rows(); ++i)
            for (std::size_t c = 0; c < grad.cols(); ++c) grad(i, c) = -grad(i, c);

        double tau = ls.initial_step;
        bool accepted = false;
        SliceBasis next;
        double next_obj = obj;
        for (int t = 0; t < ls.max_backtracks; ++t) {
            try {
                next = cayley_retract_woodbury(res.basis, grad, tau);
            } catch (const std::runtime_error&) {
                tau *= ls.shrink_factor;
                continue;
            }
            next_obj = objective_pow(x, y, next, p, ws);
            if (next_obj > obj + ls.sufficient_increase) {
                accepted = true;
                break;
            }
            tau *= ls.shrink_factor;
        }
        if (!accepted) {
            res.converged = true;
            break;
        }

        double frob = 0.0;
        for (std::size_t i = 0; i < next.axes.rows(); ++i)
            for (std::size_t c = 0; c < next.axes.cols(); ++c) {
                const double diff = next.axes(i, c) - res.basis.axes(i, c);
                frob += diff * diff;
            }
        const double rel = std::abs(next_obj - obj) /
                           std::max(std::abs(obj), std::numeric_limits<double>::min());
        res.basis = std::move(next);
        obj = next_obj;
        res.objective_trace.push_back(obj);
        if (rel < 1e-6 || std::sqrt(frob) < 1e-6) {
            res.converged = true;
            break;
        }
    }
    res.distance = std::pow(obj, 1.0 / p);
    return res;
}

MaxSwdResult max_k_swd_restarts(const Matrix& x, const Matrix& y, std::size_t k, double p,
                                int max_iter, const LineSearchConfig& ls, int restarts,
                                std::uint64_t rng_seed) {
    if (restarts < 1) throw std::invalid_argument("max_k_swd_restarts: restarts must be >= 1");
    MaxSwdResult best;
    for (int r = 0; r < restarts; ++r) {
        MaxSwdResult cur = max_k_swd(x, y, k, p, max_iter, ls, mix_seed(rng_seed, r));
        if (r == 0 || cur.distance > best.distance) best = std::move(cur);
    }
    return best;
}

Matrix subsample_rows(const Matrix& x, std::size_t n, std::uint64_t rng_seed) {
    if (n > x.rows()) throw std::invalid_argument("subsample_rows: n exceeds available rows");
    std::vector<std::size_t> idx(x.rows());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(rng_seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    Matrix out(n, x.cols());
    for (std::size_t i = 0; i < n; ++i)
        std::copy(x.row(idx[i]), x.row(idx[i]) + x.cols(), out.row(i));
    return out;
}

}  // namespace sinflow
