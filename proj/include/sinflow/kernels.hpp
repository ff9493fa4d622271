#pragma once

#include <cstddef>
#include <cstdint>

namespace sinflow::kernels {

/// Hot inner loops used by the slice machinery. The scalar backend defines
/// the reference semantics; SIMD backends may reorder reductions and are
/// therefore only required to agree within floating-point accumulation
/// tolerance (equivalence-tested).
struct Ops {
    const char* name;

    double (*dot)(const double* a, const double* b, std::size_t n);

    /// out[i] = dot(x.row(i), theta), rows of length dim at the given stride.
    void (*project_rows)(const double* x, std::size_t n_rows, std::size_t dim,
                         std::size_t stride, const double* theta, double* out);

    /// sum_i (a[i] - b[i])^2
    double (*sq_diff_sum)(const double* a, const double* b, std::size_t n);

    /// acc[j] += sum_i w[i] * x[perm[i]*stride + j] for j < dim
    void (*weighted_perm_rowsum)(const double* x, std::size_t stride,
                                 const std::uint32_t* perm, const double* w,
                                 std::size_t n, std::size_t dim, double* acc);

    /// x.row(i) += sum_k delta[i*delta_stride + k] * axes[k*dim .. k*dim+dim)
    void (*rank_update_rows)(double* x, std::size_t n_rows, std::size_t dim,
                             std::size_t stride, const double* delta,
                             std::size_t delta_stride, const double* axes,
                             std::size_t n_axes);

    void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

const Ops& scalar_ops();

/// AVX2 backend, or nullptr when not compiled in or not supported by this CPU.
const Ops* avx2_ops();

/// Runtime-selected backend. Defaults to the best available; the environment
/// variable SINF_KERNELS=scalar|avx2 forces a choice.
const Ops& active();

/// Overrides the active backend (tests); nullptr restores default selection.
void set_active(const Ops* ops);

}  // namespace sinflow::kernels
