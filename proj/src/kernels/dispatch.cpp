#include <atomic>
#include <cstdlib>
#include <string_view>

#include "repscope/kernels.hpp"

namespace repscope::simd {

namespace {

bool cpu_has_avx2() {
#if defined(REPSCOPE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

bool simd_disabled_by_env() {
    const char* v = std::getenv("REPSCOPE_SIMD");
    if (v == nullptr) {
        return false;
    }
    const std::string_view s(v);
    return s == "scalar" || s == "off" || s == "0";
}

const KernelTable* widest_supported() {
#if defined(REPSCOPE_HAVE_AVX2)
    if (cpu_has_avx2()) {
        return detail::avx2_kernels();
    }
#endif
#if defined(REPSCOPE_HAVE_NEON)
    return detail::neon_kernels();
#endif
    return &scalar_kernels();
}

std::atomic<const KernelTable*> g_override{nullptr};

}  // namespace

std::vector<const KernelTable*> available_kernels() {
    std::vector<const KernelTable*> out{&scalar_kernels()};
#if defined(REPSCOPE_HAVE_AVX2)
    if (cpu_has_avx2()) {
        out.push_back(detail::avx2_kernels());
    }
#endif
#if defined(REPSCOPE_HAVE_NEON)
    out.push_back(detail::neon_kernels());
#endif
    return out;
}

const KernelTable& active_kernels() {
    if (const KernelTable* t = g_override.load(std::memory_order_acquire)) {
        return *t;
    }
    static const KernelTable* automatic = simd_disabled_by_env() ? &scalar_kernels() : widest_supported();
    return *automatic;
}

void set_active_kernels(const KernelTable* table) {
    g_override.store(table, std::memory_order_release);
}

}  // namespace repscope::simd
