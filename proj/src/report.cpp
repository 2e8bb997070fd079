#include "repscope/report.hpp"

#include <algorithm>
#include <cmath>

#include "repscope/cam.hpp"
#include "repscope/error.hpp"
#include "repscope/tensorio.hpp"

namespace repscope::report {

ColorMap::ColorMap(std::vector<ColorStop> stops) : stops_(std::move(stops)) {
    if (stops_.size() < 2 || stops_.front().position != 0.0 || stops_.back().position != 1.0) {
        fail(Errc::BadArgument, "colormap needs at least two stops spanning 0 to 1");
    }
    for (std::size_t i = 1; i < stops_.size(); ++i) {
        if (!(stops_[i].position > stops_[i - 1].position)) {
            fail(Errc::BadArgument, "colormap positions must ascend");
        }
    }
}

Rgb ColorMap::color_at(double v) const {
    v = std::clamp(v, 0.0, 1.0);
    std::size_t i = 0;
    while (i + 2 < stops_.size() && v > stops_[i + 1].position) {
        ++i;
    }
    const auto& a = stops_[i];
    const auto& b = stops_[i + 1];
    const double t = (v - a.position) / (b.position - a.position);
    Rgb out{};
    for (std::size_t ch = 0; ch < 3; ++ch) {
        const double x = a.color[ch] + t * (static_cast<double>(b.color[ch]) - a.color[ch]);
        out[ch] = static_cast<std::uint8_t>(std::clamp(std::floor(x + 0.5), 0.0, 255.0));
    }
    return out;
}

const ColorMap& default_colormap() {
    static const ColorMap cmap({{0.0, {0, 0, 255}},
                                {0.25, {0, 255, 255}},
                                {0.5, {0, 255, 0}},
                                {0.75, {255, 255, 0}},
                                {1.0, {255, 0, 0}}});
    return cmap;
}

std::uint8_t quantize_unit(double v) {
    return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5));
}

namespace {

std::uint8_t quantize_byte(double v) {
    return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 255.0) + 0.5));
}

}  // namespace

Rgb RgbImage::pixel(std::size_t y, std::size_t x) const {
    const std::size_t o = (y * width + x) * 3;
    return {pixels.at(o), pixels.at(o + 1), pixels.at(o + 2)};
}

std::string encode_ppm(const RgbImage& img) {
    if (img.pixels.size() != img.width * img.height * 3 || img.width == 0 || img.height == 0) {
        fail(Errc::ShapeMismatch, "image buffer does not match its size");
    }
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
    return out;
}

void write_ppm(const RgbImage& img, const std::filesystem::path& path) {
    io::write_text_file(path, encode_ppm(img));
}

RgbImage heatmap_image(const Matrix& m, const ColorMap& cmap, std::size_t zoom) {
    if (m.rows == 0 || m.cols == 0) {
        fail(Errc::EmptyInput, "empty matrix");
    }
    if (zoom == 0) {
        fail(Errc::BadArgument, "zoom must be >= 1");
    }
    for (double v : m.data) {
        if (!std::isfinite(v)) {
            fail(Errc::NonFiniteInput, "heatmap input contains NaN or Inf");
        }
    }
    RgbImage img{m.cols * zoom, m.rows * zoom, {}};
    img.pixels.resize(img.width * img.height * 3);
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            const Rgb c = cmap.color_at(m(y / zoom, x / zoom));
            std::copy(c.begin(), c.end(), img.pixels.begin() + static_cast<std::ptrdiff_t>((y * img.width + x) * 3));
        }
    }
    return img;
}

void render_heatmap(const Matrix& m, const ColorMap& cmap, const std::filesystem::path& path, std::size_t zoom) {
    write_ppm(heatmap_image(m, cmap, zoom), path);
}

RgbImage overlay_image(const Tensor& image, const Tensor& grid, double alpha, const ColorMap& cmap) {
    if (image.rank() != 3 || image.dim(0) != 3) {
        fail(Errc::ShapeMismatch, "overlay image must be [3,H,W], got " + dims_to_string(image.dims()));
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        fail(Errc::BadArgument, "alpha must lie in [0,1]");
    }
    if (!image.all_finite() || !grid.all_finite()) {
        fail(Errc::NonFiniteInput, "overlay input contains NaN or Inf");
    }
    const std::size_t H = image.dim(1);
    const std::size_t W = image.dim(2);
    const Tensor up = cam::upsample_bilinear(grid, H, W);
    const auto [lo_it, hi_it] = std::minmax_element(up.values().begin(), up.values().end());
    const double lo = *lo_it;
    const double span = static_cast<double>(*hi_it) - lo;

    RgbImage img{W, H, std::vector<std::uint8_t>(W * H * 3)};
    for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t x = 0; x < W; ++x) {
            const double v = span > 0.0 ? (up[y * W + x] - lo) / span : 0.5;
            const Rgb c = cmap.color_at(v);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                const double base = std::clamp(static_cast<double>(image.at(ch, y, x)), 0.0, 1.0) * 255.0;
                img.pixels[(y * W + x) * 3 + ch] = quantize_byte((1.0 - alpha) * base + alpha * c[ch]);
            }
        }
    }
    return img;
}

void overlay_cam(const Tensor& image, const Tensor& grid, double alpha, const ColorMap& cmap,
                 const std::filesystem::path& path) {
    write_ppm(overlay_image(image, grid, alpha, cmap), path);
}

}  // namespace repscope::report
