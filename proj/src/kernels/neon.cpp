// NEON variants for AArch64, where Advanced SIMD is part of the baseline ISA.

#include "kernels_impl.hpp"

#if defined(__ARM_NEON) || defined(__aarch64__)

#include <arm_neon.h>

namespace repscope::simd {

namespace {

constexpr std::size_t kLanes = 4;

inline float32x4_t load_strided(const float* p, std::size_t stride) {
    if (stride == 1) {
        return vld1q_f32(p);
    }
    float32x4_t v = vdupq_n_f32(p[0]);
    v = vsetq_lane_f32(p[stride], v, 1);
    v = vsetq_lane_f32(p[2 * stride], v, 2);
    v = vsetq_lane_f32(p[3 * stride], v, 3);
    return v;
}

// a > b ? a : b per lane. vmaxq_f32 differs from the scalar select on
// signed zeros, so select explicitly.
inline float32x4_t select_greater(float32x4_t a, float32x4_t b) {
    return vbslq_f32(vcgtq_f32(a, b), a, b);
}

void conv2d(const ConvGeometry& g, const float* input, const float* weight, const float* bias, float* out) {
    const std::size_t vec_end = g.out_w - g.out_w % kLanes;
    const std::size_t wsize = g.in_ch * g.kh * g.kw;
    for (std::size_t c = 0; c < g.out_ch; ++c) {
        const float* wc = weight + c * wsize;
        const float32x4_t vbias = vdupq_n_f32(bias[c]);
        for (std::size_t y = 0; y < g.out_h; ++y) {
            float* orow = out + (c * g.out_h + y) * g.out_w;
            for (std::size_t x = 0; x < vec_end; x += kLanes) {
                float32x4_t acc = vdupq_n_f32(0.0f);
                for (std::size_t i = 0; i < g.in_ch; ++i) {
                    const float* plane = input + i * g.in_h * g.in_w;
                    const float* wi = wc + i * g.kh * g.kw;
                    for (std::size_t j = 0; j < g.kh; ++j) {
                        const float* row = plane + (y * g.stride + j) * g.in_w + x * g.stride;
                        const float* wj = wi + j * g.kw;
                        for (std::size_t k = 0; k < g.kw; ++k) {
                            // vmulq + vaddq, never vfmaq: keeps scalar rounding.
                            acc = vaddq_f32(acc, vmulq_f32(vdupq_n_f32(wj[k]), load_strided(row + k, g.stride)));
                        }
                    }
                }
                vst1q_f32(orow + x, vaddq_f32(vbias, acc));
            }
            conv_row_scalar(g, input, wc, bias[c], y, vec_end, g.out_w, orow);
        }
    }
}

void relu(const float* in, float* out, std::size_t n) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    const std::size_t vec_end = n - n % kLanes;
    for (std::size_t i = 0; i < vec_end; i += kLanes) {
        vst1q_f32(out + i, select_greater(vld1q_f32(in + i), zero));
    }
    relu_range(in, out, vec_end, n);
}

void maxpool(const PoolGeometry& g, const float* in, float* out) {
    const std::size_t vec_end = g.out_w - g.out_w % kLanes;
    for (std::size_t c = 0; c < g.channels; ++c) {
        const float* plane = in + c * g.in_h * g.in_w;
        for (std::size_t y = 0; y < g.out_h; ++y) {
            float* orow = out + (c * g.out_h + y) * g.out_w;
            for (std::size_t x = 0; x < vec_end; x += kLanes) {
                const float* origin = plane + (y * g.stride) * g.in_w + x * g.stride;
                float32x4_t m = load_strided(origin, g.stride);
                for (std::size_t j = 0; j < g.k; ++j) {
                    const float* row = origin + j * g.in_w;
                    for (std::size_t k = 0; k < g.k; ++k) {
                        m = select_greater(load_strided(row + k, g.stride), m);
                    }
                }
                vst1q_f32(orow + x, m);
            }
            pool_row_scalar(g, in, c, y, vec_end, g.out_w, orow);
        }
    }
}

float max_value(const float* in, std::size_t n) {
    float r = in[0];
    std::size_t i = 1;
    if (n >= kLanes) {
        float32x4_t m = vld1q_f32(in);
        const std::size_t vec_end = n - n % kLanes;
        for (i = kLanes; i < vec_end; i += kLanes) {
            m = select_greater(vld1q_f32(in + i), m);
        }
        float lanes[kLanes];
        vst1q_f32(lanes, m);
        r = lanes[0];
        for (std::size_t l = 1; l < kLanes; ++l) {
            r = lanes[l] > r ? lanes[l] : r;
        }
    }
    for (; i < n; ++i) {
        r = in[i] > r ? in[i] : r;
    }
    return r;
}

void divide(const float* in, float divisor, float* out, std::size_t n) {
    const float32x4_t d = vdupq_n_f32(divisor);
    const std::size_t vec_end = n - n % kLanes;
    for (std::size_t i = 0; i < vec_end; i += kLanes) {
        vst1q_f32(out + i, vdivq_f32(vld1q_f32(in + i), d));
    }
    for (std::size_t i = vec_end; i < n; ++i) {
        out[i] = in[i] / divisor;
    }
}

void weighted_channel_sum(const float* maps, const float* weights, std::size_t channels, std::size_t plane,
                          float* out) {
    const std::size_t vec_end = plane - plane % kLanes;
    for (std::size_t p = 0; p < vec_end; p += kLanes) {
        float32x4_t acc = vdupq_n_f32(0.0f);
        for (std::size_t k = 0; k < channels; ++k) {
            acc = vaddq_f32(acc, vmulq_f32(vdupq_n_f32(weights[k]), vld1q_f32(maps + k * plane + p)));
        }
        vst1q_f32(out + p, acc);
    }
    weighted_sum_range(maps, weights, channels, plane, vec_end, plane, out);
}

}  // namespace

namespace detail {

const KernelTable* neon_kernels() {
    static const KernelTable table{
        "neon", conv2d, relu, maxpool, max_value, divide, weighted_channel_sum,
    };
    return &table;
}

}  // namespace detail

}  // namespace repscope::simd

#endif
