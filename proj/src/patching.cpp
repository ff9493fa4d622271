#include "sinflow/patching.hpp"

#include <algorithm>
#include <stdexcept>

namespace sinflow {

PatchLayout make_layout(std::size_t side, std::size_t channels, std::size_t patch_side,
                        std::size_t shift_y, std::size_t shift_x, bool single_channel) {
    if (side == 0 || channels == 0) throw std::invalid_argument("make_layout: empty image shape");
    if (patch_side < 1 || patch_side > side)
        throw std::invalid_argument("make_layout: need 1 <= q <= S");
    if (shift_y >= side || shift_x >= side)
        throw std::invalid_argument("make_layout: shifts must be in [0, S)");

    PatchLayout layout;
    layout.side = side;
    layout.channels = channels;
    layout.patch_side = patch_side;
    layout.shift_y = shift_y;
    layout.shift_x = shift_x;
    layout.single_channel = single_channel;

    const std::size_t p = side / patch_side;
    std::vector<char> covered(side * side * channels, 0);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
            const std::size_t ch_blocks = single_channel ? channels : 1;
            for (std::size_t cb = 0; cb < ch_blocks; ++cb) {
                std::vector<std::uint32_t> idx;
                idx.reserve(layout.block_dim());
                for (std::size_t r = 0; r < patch_side; ++r) {
                    for (std::size_t s = 0; s < patch_side; ++s) {
                        const std::size_t row = (a * patch_side + r + shift_y) % side;
                        const std::size_t col = (b * patch_side + s + shift_x) % side;
                        const std::size_t pix = (row * side + col) * channels;
                        if (single_channel) {
                            idx.push_back(static_cast<std::uint32_t>(pix + cb));
                        } else {
                            for (std::size_t ch = 0; ch < channels; ++ch)
                                idx.push_back(static_cast<std::uint32_t>(pix + ch));
                        }
                    }
                }
                for (std::uint32_t i : idx) covered[i] = 1;
                layout.blocks.push_back(std::move(idx));
            }
        }
    }
    for (std::size_t i = 0; i < covered.size(); ++i)
        if (!covered[i]) layout.leftover.push_back(static_cast<std::uint32_t>(i));
    return layout;
}

PatchSet gather_patches(const PatchLayout& layout, const Matrix& x) {
    const std::size_t flat = layout.side * layout.side * layout.channels;
    if (x.cols() != flat)
        throw std::invalid_argument("gather_patches: data dimension does not match layout");

    PatchSet set;
    set.patches.reserve(layout.blocks.size());
    for (const auto& idx : layout.blocks) {
        Matrix patch(x.rows(), idx.size());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double* src = x.row(i);
            double* dst = patch.row(i);
            for (std::size_t j = 0; j < idx.size(); ++j) dst[j] = src[idx[j]];
        }
        set.patches.push_back(std::move(patch));
    }
    set.leftover = Matrix(x.rows(), layout.leftover.size());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* src = x.row(i);
        double* dst = set.leftover.row(i);
        for (std::size_t j = 0; j < layout.leftover.size(); ++j) dst[j] = src[layout.leftover[j]];
    }
    return set;
}

Matrix scatter_patches(const PatchLayout& layout, const PatchSet& set) {
    if (set.patches.size() != layout.blocks.size())
        throw std::invalid_argument("scatter_patches: block count mismatch");
    const std::size_t rows = set.leftover.rows();
    Matrix out(rows, layout.side * layout.side * layout.channels);
    for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
        const auto& idx = layout.blocks[b];
        const Matrix& patch = set.patches[b];
        if (patch.cols() != idx.size() || patch.rows() != rows)
            throw std::invalid_argument("scatter_patches: patch shape mismatch");
        for (std::size_t i = 0; i < rows; ++i) {
            const double* src = patch.row(i);
            double* dst = out.row(i);
            for (std::size_t j = 0; j < idx.size(); ++j) dst[idx[j]] = src[j];
        }
    }
    if (set.leftover.cols() != layout.leftover.size())
        throw std::invalid_argument("scatter_patches: leftover shape mismatch");
    for (std::size_t i = 0; i < rows; ++i) {
        const double* src = set.leftover.row(i);
        double* dst = out.row(i);
        for (std::size_t j = 0; j < layout.leftover.size(); ++j) dst[layout.leftover[j]] = src[j];
    }
    return out;
}

PatchSchedule default_schedule(std::size_t side, std::size_t channels,
                               std::size_t iterations_per_stage) {
    if (side < 2) throw std::invalid_argument("default_schedule: need S >= 2");
    PatchSchedule stages;
    std::size_t q = side;
    while (true) {
        const std::size_t full_dim = q * q * channels;
        stages.push_back({q, false, std::min(2 * q, full_dim), iterations_per_stage});
        if (channels == 3 && q <= 8)
            stages.push_back({q, true, std::min(q, q * q), iterations_per_stage});
        if (q == 2) break;
        q = (q > 8) ? q / 2 : q - 1;
    }
    return stages;
}

}  // namespace sinflow
