#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "sinflow/matrix.hpp"
#include "sinflow/rng.hpp"

namespace testsup {

using sinflow::Matrix;
using sinflow::Rng;

inline Matrix gaussian_blob(std::size_t n, std::size_t d, const std::vector<double>& mean,
                            double sigma, std::uint64_t seed) {
    Matrix m = sinflow::gaussian_matrix(n, d, seed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = mean[j] + sigma * m(i, j);
    return m;
}

inline Matrix standard_gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
    return sinflow::gaussian_matrix(n, d, seed);
}

/// Two interleaved half-circles with Gaussian noise (the usual 2D benchmark).
inline Matrix two_moons(std::size_t n, double noise, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::normal_distribution<double> gauss;
    Matrix m(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = angle(rng);
        if (i % 2 == 0) {
            m(i, 0) = std::cos(t);
            m(i, 1) = std::sin(t);
        } else {
            m(i, 0) = 1.0 - std::cos(t);
            m(i, 1) = 0.5 - std::sin(t);
        }
        m(i, 0) += noise * gauss(rng);
        m(i, 1) += noise * gauss(rng);
    }
    return m;
}

/// Zero-mean Gaussian with covariance L L^T where L is a fixed anisotropic
/// lower-triangular mixing of the coordinates.
inline Matrix correlated_gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
    Matrix z = sinflow::gaussian_matrix(n, d, seed);
    std::vector<double> scale(d);
    for (std::size_t j = 0; j < d; ++j) scale[j] = std::pow(2.0, 2.0 - static_cast<double>(j) * 0.5);
    Matrix m(n, d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double acc = scale[j] * z(i, j);
            if (j > 0) acc += 0.8 * scale[j - 1] * z(i, j - 1);
            m(i, j) = acc;
        }
    return m;
}

/// 1D bimodal mixture: 0.5 N(-2, 0.5^2) + 0.5 N(2, 1^2).
inline Matrix bimodal_1d(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> gauss;
    std::bernoulli_distribution pick(0.5);
    Matrix m(n, 1);
    for (std::size_t i = 0; i < n; ++i)
        m(i, 0) = pick(rng) ? (-2.0 + 0.5 * gauss(rng)) : (2.0 + 1.0 * gauss(rng));
    return m;
}

inline double bimodal_1d_pdf(double x) {
    auto normal_pdf = [](double v, double mu, double s) {
        const double z = (v - mu) / s;
        return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
    };
    return 0.5 * normal_pdf(x, -2.0, 0.5) + 0.5 * normal_pdf(x, 2.0, 1.0);
}

inline Matrix first_rows(const Matrix& m, std::size_t n) {
    Matrix out(n, m.cols());
    std::copy(m.row(0), m.row(0) + n * m.cols(), out.data());
    return out;
}

inline Matrix last_rows(const Matrix& m, std::size_t n) {
    Matrix out(n, m.cols());
    std::copy(m.row(m.rows() - n), m.row(m.rows() - n) + n * m.cols(), out.data());
    return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    return worst;
}

}  // namespace testsup
