#pragma once

// Data-parallel inner loops used by the forward engine, the pattern
// normalizer and CAM. Each kernel has a scalar reference implementation and
// optional SIMD variants (AVX2 on x86-64, NEON on AArch64) chosen at runtime.
//
// Contract shared by every variant: SIMD lanes only ever span independent
// outputs, so each output is accumulated in exactly the order the scalar
// kernel uses. Together with -ffp-contract=off this makes every variant
// bit-identical to the scalar one, which the kernel tests assert.

#include <cstddef>
#include <string_view>
#include <vector>

namespace repscope::simd {

struct ConvGeometry {
    std::size_t in_ch = 0;
    std::size_t in_h = 0;  // padded input height
    std::size_t in_w = 0;  // padded input width
    std::size_t out_ch = 0;
    std::size_t kh = 0;
    std::size_t kw = 0;
    std::size_t stride = 1;
    std::size_t out_h = 0;
    std::size_t out_w = 0;
};

struct PoolGeometry {
    std::size_t channels = 0;
    std::size_t in_h = 0;
    std::size_t in_w = 0;
    std::size_t k = 0;
    std::size_t stride = 1;
    std::size_t out_h = 0;
    std::size_t out_w = 0;
};

struct KernelTable {
    std::string_view name;

    // out[c,y,x] = bias[c] + sum_{i,j,k} w[c,i,j,k] * in[i, y*s+j, x*s+k]
    // over an already zero-padded input; the sum starts at 0 and runs
    // i, j, k ascending, then bias is added.
    void (*conv2d)(const ConvGeometry& g, const float* input, const float* weight, const float* bias,
                   float* out);

    // out[i] = in[i] > 0 ? in[i] : 0
    void (*relu)(const float* in, float* out, std::size_t n);

    // Window max, windows scanned row-major; ties keep the earlier value.
    void (*maxpool)(const PoolGeometry& g, const float* in, float* out);

    // Largest element; n >= 1.
    float (*max_value)(const float* in, std::size_t n);

    // out[i] = in[i] / divisor
    void (*divide)(const float* in, float divisor, float* out, std::size_t n);

    // out[p] = sum_k weights[k] * maps[k*plane + p], k ascending from 0.
    void (*weighted_channel_sum)(const float* maps, const float* weights, std::size_t channels,
                                 std::size_t plane, float* out);
};

const KernelTable& scalar_kernels();

// Every variant usable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

// The table used by the library. Picks the widest supported variant unless
// REPSCOPE_SIMD=scalar (or off) is set in the environment.
const KernelTable& active_kernels();

// Override the active table for the current process (tests, benchmarking).
// Pass nullptr to return to automatic selection.
void set_active_kernels(const KernelTable* table);

namespace detail {
// Defined only in builds that compile the matching variant.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();
}  // namespace detail

}  // namespace repscope::simd
