#pragma once

#include <cstdint>
#include <vector>

#include "sinflow/matrix.hpp"

namespace sinflow {

/// Decomposition of a flattened S x S x c image into shifted q x q patches
/// under periodic boundary conditions. Flattening convention is row-major
/// (row, col, channel): index = (row * S + col) * c + channel.
///
/// With full-depth blocks each patch spans all channels (q^2 c values);
/// single-channel mode splits every patch into c blocks of q^2 values.
/// Pixels not covered by the p x p patch grid (q does not divide S) are
/// listed in `leftover` and pass through untouched.
struct PatchLayout {
    std::size_t side = 0;        // S
    std::size_t channels = 1;    // c
    std::size_t patch_side = 0;  // q
    std::size_t shift_y = 0, shift_x = 0;
    bool single_channel = false;

    std::vector<std::vector<std::uint32_t>> blocks;  // column indices per block
    std::vector<std::uint32_t> leftover;

    std::size_t patches_per_side() const { return side / patch_side; }
    std::size_t block_dim() const {
        return patch_side * patch_side * (single_channel ? 1 : channels);
    }
};

PatchLayout make_layout(std::size_t side, std::size_t channels, std::size_t patch_side,
                        std::size_t shift_y, std::size_t shift_x, bool single_channel = false);

struct PatchSet {
    std::vector<Matrix> patches;  // one N x block_dim matrix per block
    Matrix leftover;              // N x |leftover|
};

PatchSet gather_patches(const PatchLayout& layout, const Matrix& x);

/// Exact inverse of gather_patches, leftovers included.
Matrix scatter_patches(const PatchLayout& layout, const PatchSet& set);

struct PatchStage {
    std::size_t patch_side = 0;
    bool single_channel = false;
    std::size_t axes = 0;  // K per patch, capped at the block dimension
    std::size_t iterations = 0;
};

using PatchSchedule = std::vector<PatchStage>;

/// Hierarchical schedule: starts at q = S and descends (halving, then by one)
/// to q = 2, with K = 2q capped at the block dimension. For c = 3, stages
/// with q <= 8 alternate a full-depth stage (K = 2q) with a single-channel
/// stage (K = q).
PatchSchedule default_schedule(std::size_t side, std::size_t channels,
                               std::size_t iterations_per_stage = 100);

}  // namespace sinflow
