#include "oracles.hpp"

#include <cmath>
#include <unistd.h>

namespace repscope::testing {

Tensor conv_reference(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride,
                      std::size_t pad) {
    const std::size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
    const std::size_t oh = (h + 2 * pad - kh) / stride + 1;
    const std::size_t ow = (w + 2 * pad - kw) / stride + 1;
    Tensor out({cout, oh, ow});
    for (std::size_t c = 0; c < cout; ++c) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                double acc = bias[c];
                for (std::size_t i = 0; i < cin; ++i) {
                    for (std::size_t j = 0; j < kh; ++j) {
                        for (std::size_t k = 0; k < kw; ++k) {
                            const long sy = static_cast<long>(y * stride + j) - static_cast<long>(pad);
                            const long sx = static_cast<long>(x * stride + k) - static_cast<long>(pad);
                            if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(w)) {
                                continue;
                            }
                            acc += static_cast<double>(weight[((c * cin + i) * kh + j) * kw + k]) *
                                   input.at(i, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
                        }
                    }
                }
                out.at(c, y, x) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

double pearson_reference(const std::vector<double>& a, const std::vector<double>& b) {
    long double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= a.size();
    mb /= b.size();
    long double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return static_cast<double>(sab / std::sqrt(saa * sbb));
}

std::vector<double> ranks_reference(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t less = 0, equal = 0;
        for (double x : v) {
            less += x < v[i] ? 1 : 0;
            equal += x == v[i] ? 1 : 0;
        }
        r[i] = 1.0 + static_cast<double>(less) + (static_cast<double>(equal) - 1.0) / 2.0;
    }
    return r;
}

Tensor bilinear_reference(const Tensor& grid, std::size_t out_h, std::size_t out_w) {
    const std::size_t h = grid.dim(0), w = grid.dim(1);
    Tensor out({out_h, out_w});
    for (std::size_t y = 0; y < out_h; ++y) {
        const double sy = out_h == 1 ? 0.0 : static_cast<double>(y) * (h - 1.0) / (out_h - 1.0);
        for (std::size_t x = 0; x < out_w; ++x) {
            const double sx = out_w == 1 ? 0.0 : static_cast<double>(x) * (w - 1.0) / (out_w - 1.0);
            double acc = 0.0;
            for (std::size_t i = 0; i < h; ++i) {
                const double wy = std::max(0.0, 1.0 - std::abs(sy - static_cast<double>(i)));
                for (std::size_t j = 0; j < w; ++j) {
                    const double wx = std::max(0.0, 1.0 - std::abs(sx - static_cast<double>(j)));
                    acc += wy * wx * grid[i * w + j];
                }
            }
            out[y * out_w + x] = static_cast<float>(acc);
        }
    }
    return out;
}

std::vector<double> central_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("repscope_" + name + "_" + std::to_string(static_cast<long>(::getpid())));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace repscope::testing
