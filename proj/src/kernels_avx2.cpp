#include "sinflow/kernels.hpp"

#if SINF_HAVE_AVX2

#include <immintrin.h>

namespace sinflow::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double sum = hsum(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void project_rows_avx2(const double* x, std::size_t n_rows, std::size_t dim,
                       std::size_t stride, const double* theta, double* out) {
    for (std::size_t i = 0; i < n_rows; ++i)
        out[i] = dot_avx2(x + i * stride, theta, dim);
}

double sq_diff_sum_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(r, r, acc);
    }
    double sum = hsum(acc);
    for (; i < n; ++i) {
        const double r = a[i] - b[i];
        sum += r * r;
    }
    return sum;
}

void weighted_perm_rowsum_avx2(const double* x, std::size_t stride,
                               const std::uint32_t* perm, const double* w,
                               std::size_t n, std::size_t dim, double* acc) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x + static_cast<std::size_t>(perm[i]) * stride;
        const __m256d wi = _mm256_set1_pd(w[i]);
        std::size_t j = 0;
        for (; j + 4 <= dim; j += 4) {
            __m256d v = _mm256_loadu_pd(acc + j);
            v = _mm256_fmadd_pd(wi, _mm256_loadu_pd(row + j), v);
            _mm256_storeu_pd(acc + j, v);
        }
        for (; j < dim; ++j) acc[j] += w[i] * row[j];
    }
}

void rank_update_rows_avx2(double* x, std::size_t n_rows, std::size_t dim,
                           std::size_t stride, const double* delta,
                           std::size_t delta_stride, const double* axes,
                           std::size_t n_axes) {
    for (std::size_t i = 0; i < n_rows; ++i) {
        double* row = x + i * stride;
        const double* d = delta + i * delta_stride;
        for (std::size_t k = 0; k < n_axes; ++k) {
            const __m256d dk = _mm256_set1_pd(d[k]);
            const double* axis = axes + k * dim;
            std::size_t j = 0;
            for (; j + 4 <= dim; j += 4) {
                __m256d v = _mm256_loadu_pd(row + j);
                v = _mm256_fmadd_pd(dk, _mm256_loadu_pd(axis + j), v);
                _mm256_storeu_pd(row + j, v);
            }
            for (; j < dim; ++j) row[j] += d[k] * axis[j];
        }
    }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(y + i);
        v = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), v);
        _mm256_storeu_pd(y + i, v);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const Ops* avx2_ops() {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
    static const Ops ops = {
        "avx2",
        dot_avx2,
        project_rows_avx2,
        sq_diff_sum_avx2,
        weighted_perm_rowsum_avx2,
        rank_update_rows_avx2,
        axpy_avx2,
    };
    return &ops;
}

}  // namespace sinflow::kernels

#else

namespace sinflow::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace sinflow::kernels

#endif  // SINF_HAVE_AVX2
