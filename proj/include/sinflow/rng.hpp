#pragma once

#include <cstdint>
#include <random>

#include "sinflow/matrix.hpp"

namespace sinflow {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named stream (splitmix64 finalizer).
/// Keeps unrelated random draws (base samples, restarts, patch shifts, ...)
/// decoupled while everything stays reproducible from one user seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    return gaussian_matrix(rows, cols, rng);
}

}  // namespace sinflow
