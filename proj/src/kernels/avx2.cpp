// AVX2 variants. This file is compiled with -mavx2 (and without -mfma) and is
// only entered after a runtime CPU check, see dispatch.cpp.

#include "kernels_impl.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cstdint>

namespace repscope::simd {

namespace {

constexpr std::size_t kLanes = 8;

inline __m256i lane_offsets(std::size_t stride) {
    const auto s = static_cast<std::int32_t>(stride);
    return _mm256_setr_epi32(0, s, 2 * s, 3 * s, 4 * s, 5 * s, 6 * s, 7 * s);
}

// Eight horizontally adjacent outputs read inputs `stride` apart.
inline __m256 load_strided(const float* p, std::size_t stride, __m256i offsets) {
    if (stride == 1) {
        return _mm256_loadu_ps(p);
    }
    return _mm256_i32gather_ps(p, offsets, 4);
}

void conv2d(const ConvGeometry& g, const float* input, const float* weight, const float* bias, float* out) {
    const __m256i offsets = lane_offsets(g.stride);
    const std::size_t vec_end = g.out_w - g.out_w % kLanes;
    const std::size_t wsize = g.in_ch * g.kh * g.kw;
    for (std::size_t c = 0; c < g.out_ch; ++c) {
        const float* wc = weight + c * wsize;
        const __m256 vbias = _mm256_set1_ps(bias[c]);
        for (std::size_t y = 0; y < g.out_h; ++y) {
            float* orow = out + (c * g.out_h + y) * g.out_w;
            for (std::size_t x = 0; x < vec_end; x += kLanes) {
                __m256 acc = _mm256_setzero_ps();
                for (std::size_t i = 0; i < g.in_ch; ++i) {
                    const float* plane = input + i * g.in_h * g.in_w;
                    const float* wi = wc + i * g.kh * g.kw;
                    for (std::size_t j = 0; j < g.kh; ++j) {
                        const float* row = plane + (y * g.stride + j) * g.in_w + x * g.stride;
                        const float* wj = wi + j * g.kw;
                        for (std::size_t k = 0; k < g.kw; ++k) {
                            const __m256 v = load_strided(row + k, g.stride, offsets);
                            acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(wj[k]), v));
                        }
                    }
                }
                _mm256_storeu_ps(orow + x, _mm256_add_ps(vbias, acc));
            }
            conv_row_scalar(g, input, wc, bias[c], y, vec_end, g.out_w, orow);
        }
    }
}

void relu(const float* in, float* out, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    const std::size_t vec_end = n - n % kLanes;
    for (std::size_t i = 0; i < vec_end; i += kLanes) {
        // max_ps(a, b) is a > b ? a : b, matching the scalar select.
        _mm256_storeu_ps(out + i, _mm256_max_ps(_mm256_loadu_ps(in + i), zero));
    }
    relu_range(in, out, vec_end, n);
}

void maxpool(const PoolGeometry& g, const float* in, float* out) {
    const __m256i offsets = lane_offsets(g.stride);
    const std::size_t vec_end = g.out_w - g.out_w % kLanes;
    for (std::size_t c = 0; c < g.channels; ++c) {
        const float* plane = in + c * g.in_h * g.in_w;
        for (std::size_t y = 0; y < g.out_h; ++y) {
            float* orow = out + (c * g.out_h + y) * g.out_w;
            for (std::size_t x = 0; x < vec_end; x += kLanes) {
                const float* origin = plane + (y * g.stride) * g.in_w + x * g.stride;
                __m256 m = load_strided(origin, g.stride, offsets);
                for (std::size_t j = 0; j < g.k; ++j) {
                    const float* row = origin + j * g.in_w;
                    for (std::size_t k = 0; k < g.k; ++k) {
                        m = _mm256_max_ps(load_strided(row + k, g.stride, offsets), m);
                    }
                }
                _mm256_storeu_ps(orow + x, m);
            }
            pool_row_scalar(g, in, c, y, vec_end, g.out_w, orow);
        }
    }
}

float max_value(const float* in, std::size_t n) {
    if (n < kLanes) {
        float m = in[0];
        for (std::size_t i = 1; i < n; ++i) {
            m = in[i] > m ? in[i] : m;
        }
        return m;
    }
    __m256 m = _mm256_loadu_ps(in);
    const std::size_t vec_end = n - n % kLanes;
    for (std::size_t i = kLanes; i < vec_end; i += kLanes) {
        m = _mm256_max_ps(_mm256_loadu_ps(in + i), m);
    }
    alignas(32) float lanes[kLanes];
    _mm256_store_ps(lanes, m);
    float r = lanes[0];
    for (std::size_t l = 1; l < kLanes; ++l) {
        r = lanes[l] > r ? lanes[l] : r;
    }
    for (std::size_t i = vec_end; i < n; ++i) {
        r = in[i] > r ? in[i] : r;
    }
    return r;
}

void divide(const float* in, float divisor, float* out, std::size_t n) {
    const __m256 d = _mm256_set1_ps(divisor);
    const std::size_t vec_end = n - n % kLanes;
    for (std::size_t i = 0; i < vec_end; i += kLanes) {
        _mm256_storeu_ps(out + i, _mm256_div_ps(_mm256_loadu_ps(in + i), d));
    }
    for (std::size_t i = vec_end; i < n; ++i) {
        out[i] = in[i] / divisor;
    }
}

void weighted_channel_sum(const float* maps, const float* weights, std::size_t channels, std::size_t plane,
                          float* out) {
    const std::size_t vec_end = plane - plane % kLanes;
    for (std::size_t p = 0; p < vec_end; p += kLanes) {
        __m256 acc = _mm256_setzero_ps();
        for (std::size_t k = 0; k < channels; ++k) {
            const __m256 v = _mm256_loadu_ps(maps + k * plane + p);
            acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(weights[k]), v));
        }
        _mm256_storeu_ps(out + p, acc);
    }
    weighted_sum_range(maps, weights, channels, plane, vec_end, plane, out);
}

}  // namespace

namespace detail {

const KernelTable* avx2_kernels() {
    static const KernelTable table{
        "avx2", conv2d, relu, maxpool, max_value, divide, weighted_channel_sum,
    };
    return &table;
}

}  // namespace detail

}  // namespace repscope::simd

#endif  // __AVX2__
