#include "sinflow/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace sinflow::kernels {
namespace {

const Ops* select_default() {
    if (const char* env = std::getenv("SINF_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
        if (std::strcmp(env, "avx2") == 0 && avx2_ops()) return avx2_ops();
    }
    if (const Ops* simd = avx2_ops()) return simd;
    return &scalar_ops();
}

std::atomic<const Ops*> g_override{nullptr};

}  // namespace

const Ops& active() {
    if (const Ops* forced = g_override.load(std::memory_order_relaxed)) return *forced;
    static const Ops* chosen = select_default();
    return *chosen;
}

void set_active(const Ops* ops) { g_override.store(ops, std::memory_order_relaxed); }

}  // namespace sinflow::kernels
