#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sinflow/matrix.hpp"

namespace sinflow {

/// K orthonormal slice axes in R^d. Stored transposed: row k of `axes` is
/// the axis theta_k, so each axis is contiguous in memory.
struct SliceBasis {
    Matrix axes;  // K x d, rows orthonormal

    std::size_t dim() const { return axes.cols(); }
    std::size_t num_axes() const { return axes.rows(); }
    const double* axis(std::size_t k) const { return axes.row(k); }

    /// max |A^T A - I| over all entries.
    double orthonormality_error() const;
    bool is_orthonormal(double tol = 1e-8) const { return orthonormality_error() <= tol; }
};

struct LineSearchConfig {
    double initial_step = 0.5;
    double shrink_factor = 0.5;
    double sufficient_increase = 0.0;  // accept any strict increase
    int max_backtracks = 20;
};

struct MaxSwdResult {
    double distance = 0.0;  // objective to the 1/p power
    SliceBasis basis;
    int iterations_used = 0;
    bool converged = false;
    /// p-th-power objective after the initial point and each accepted step;
    /// non-decreasing by construction of the line search.
    std::vector<double> objective_trace;
};

/// 1D p-Wasserstein distance between equal-size samples: sort both ascending
/// and pair by rank, ((1/N) sum |x_(n) - y_(n)|^p)^(1/p).
double wasserstein_1d(std::span<const double> xs, std::span<const double> ys, double p = 2.0);

/// Monte Carlo sliced Wasserstein distance over `n_projections` uniformly
/// random axes. Requires equal sample counts; subsample first if needed.
double sliced_wasserstein(const Matrix& x, const Matrix& y, int n_projections, double p,
                          std::uint64_t rng_seed);

/// ((1/K) sum_k W_p^p along theta_k)^(1/p) for a fixed basis.
double max_k_swd_objective(const Matrix& x, const Matrix& y, const SliceBasis& basis,
                           double p = 2.0);

/// Gradient of the p-th-power objective D = (1/(KN)) sum_k sum_n
/// |xhat_(n) - yhat_(n)|^p with respect to the axes, holding the per-axis
/// sort permutations fixed (subgradient at ties; ties broken by stable sort
/// on value then index). Row k is dD/d(theta_k).
Matrix objective_gradient(const Matrix& x, const Matrix& y, const SliceBasis& basis,
                          double p = 2.0);

/// Haar-distributed basis: QR orthonormalization of an i.i.d. Gaussian matrix.
SliceBasis random_orthonormal(std::size_t d, std::size_t k, std::uint64_t rng_seed);

/// Cayley step (I + tau/2 B)^{-1} (I - tau/2 B) A with B = G A^T - A G^T.
/// `g` uses the same row-per-axis layout as the basis. Throws on a step too
/// large to preserve orthonormality (caller shrinks tau).
SliceBasis cayley_retract_full(const SliceBasis& basis, const Matrix& g, double tau);

/// Same curve through the Sherman-Morrison-Woodbury identity; only a 2K x 2K
/// system is solved.
SliceBasis cayley_retract_woodbury(const SliceBasis& basis, const Matrix& g, double tau);

/// Gradient ascent of the sliced objective over the Stiefel manifold with
/// backtracking line search and Cayley retractions (Woodbury form).
MaxSwdResult max_k_swd(const Matrix& x, const Matrix& y, std::size_t k, double p, int max_iter,
                       const LineSearchConfig& ls, std::uint64_t rng_seed);

/// Runs max_k_swd from `restarts` random starting points and keeps the best
/// objective; used for metric evaluation where the global maximum matters.
MaxSwdResult max_k_swd_restarts(const Matrix& x, const Matrix& y, std::size_t k, double p,
                                int max_iter, const LineSearchConfig& ls, int restarts,
                                std::uint64_t rng_seed);

/// Deterministic subsample without replacement; use to reduce the larger of
/// two unequal sample sets before calling the equal-N distances above.
Matrix subsample_rows(const Matrix& x, std::size_t n, std::uint64_t rng_seed);

}  // namespace sinflow
