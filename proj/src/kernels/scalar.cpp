#include "kernels_impl.hpp"

namespace repscope::simd {

namespace scalar {

void conv2d(const ConvGeometry& g, const float* input, const float* weight, const float* bias, float* out) {
    for (std::size_t c = 0; c < g.out_ch; ++c) {
        const float* wc = weight + c * g.in_ch * g.kh * g.kw;
        for (std::size_t y = 0; y < g.out_h; ++y) {
            float* orow = out + (c * g.out_h + y) * g.out_w;
            conv_row_scalar(g, input, wc, bias[c], y, 0, g.out_w, orow);
        }
    }
}

void relu(const float* in, float* out, std::size_t n) {
    relu_range(in, out, 0, n);
}

void maxpool(const PoolGeometry& g, const float* in, float* out) {
    for (std::size_t c = 0; c < g.channels; ++c) {
        for (std::size_t y = 0; y < g.out_h; ++y) {
            pool_row_scalar(g, in, c, y, 0, g.out_w, out + (c * g.out_h + y) * g.out_w);
        }
    }
}

float max_value(const float* in, std::size_t n) {
    float m = in[0];
    for (std::size_t i = 1; i < n; ++i) {
        m = in[i] > m ? in[i] : m;
    }
    return m;
}

void divide(const float* in, float divisor, float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = in[i] / divisor;
    }
}

void weighted_channel_sum(const float* maps, const float* weights, std::size_t channels, std::size_t plane,
                          float* out) {
    weighted_sum_range(maps, weights, channels, plane, 0, plane, out);
}

}  // namespace scalar

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        "scalar",
        scalar::conv2d,
        scalar::relu,
        scalar::maxpool,
        scalar::max_value,
        scalar::divide,
        scalar::weighted_channel_sum,
    };
    return table;
}

}  // namespace repscope::simd
