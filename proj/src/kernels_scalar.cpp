#include "sinflow/kernels.hpp"

namespace sinflow::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void project_rows_scalar(const double* x, std::size_t n_rows, std::size_t dim,
                         std::size_t stride, const double* theta, double* out) {
    for (std::size_t i = 0; i < n_rows; ++i)
        out[i] = dot_scalar(x + i * stride, theta, dim);
}

double sq_diff_sum_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = a[i] - b[i];
        acc += r * r;
    }
    return acc;
}

void weighted_perm_rowsum_scalar(const double* x, std::size_t stride,
                                 const std::uint32_t* perm, const double* w,
                                 std::size_t n, std::size_t dim, double* acc) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x + static_cast<std::size_t>(perm[i]) * stride;
        const double wi = w[i];
        for (std::size_t j = 0; j < dim; ++j) acc[j] += wi * row[j];
    }
}

void rank_update_rows_scalar(double* x, std::size_t n_rows, std::size_t dim,
                             std::size_t stride, const double* delta,
                             std::size_t delta_stride, const double* axes,
                             std::size_t n_axes) {
    for (std::size_t i = 0; i < n_rows; ++i) {
        double* row = x + i * stride;
        const double* d = delta + i * delta_stride;
        for (std::size_t k = 0; k < n_axes; ++k) {
            const double dk = d[k];
            const double* axis = axes + k * dim;
            for (std::size_t j = 0; j < dim; ++j) row[j] += dk * axis[j];
        }
    }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar",
        dot_scalar,
        project_rows_scalar,
        sq_diff_sum_scalar,
        weighted_perm_rowsum_scalar,
        rank_update_rows_scalar,
        axpy_scalar,
    };
    return ops;
}

}  // namespace sinflow::kernels
