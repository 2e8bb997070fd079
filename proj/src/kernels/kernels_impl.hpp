#pragma once

// Scalar building blocks shared by every kernel variant. The SIMD files use
// these for the tail columns that do not fill a full vector, which keeps the
// per-output arithmetic identical across variants.

#include "repscope/kernels.hpp"

namespace repscope::simd {

inline float conv_point_scalar(const ConvGeometry& g, const float* input, const float* wc, float bias,
                               std::size_t y, std::size_t x) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < g.in_ch; ++i) {
        const float* plane = input + i * g.in_h * g.in_w;
        const float* wi = wc + i * g.kh * g.kw;
        for (std::size_t j = 0; j < g.kh; ++j) {
            const float* row = plane + (y * g.stride + j) * g.in_w + x * g.stride;
            const float* wj = wi + j * g.kw;
            for (std::size_t k = 0; k < g.kw; ++k) {
                acc = acc + wj[k] * row[k];
            }
        }
    }
    return bias + acc;
}

inline void conv_row_scalar(const ConvGeometry& g, const float* input, const float* wc, float bias, std::size_t y,
                            std::size_t x_begin, std::size_t x_end, float* orow) {
    for (std::size_t x = x_begin; x < x_end; ++x) {
        orow[x] = conv_point_scalar(g, input, wc, bias, y, x);
    }
}

inline void relu_range(const float* in, float* out, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
        out[i] = in[i] > 0.0f ? in[i] : 0.0f;
    }
}

inline void pool_row_scalar(const PoolGeometry& g, const float* in, std::size_t c, std::size_t y,
                            std::size_t x_begin, std::size_t x_end, float* orow) {
    const float* plane = in + c * g.in_h * g.in_w;
    for (std::size_t x = x_begin; x < x_end; ++x) {
        float m = plane[(y * g.stride) * g.in_w + x * g.stride];
        for (std::size_t j = 0; j < g.k; ++j) {
            const float* row = plane + (y * g.stride + j) * g.in_w + x * g.stride;
            for (std::size_t k = 0; k < g.k; ++k) {
                m = row[k] > m ? row[k] : m;
            }
        }
        orow[x] = m;
    }
}

inline void weighted_sum_range(const float* maps, const float* weights, std::size_t channels, std::size_t plane,
                               std::size_t begin, std::size_t end, float* out) {
    for (std::size_t p = begin; p < end; ++p) {
        float acc = 0.0f;
        for (std::size_t k = 0; k < channels; ++k) {
            acc = acc + weights[k] * maps[k * plane + p];
        }
        out[p] = acc;
    }
}

}  // namespace repscope::simd
