#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "repscope/table.hpp"
#include "repscope/tensor.hpp"

namespace repscope::report {

using Rgb = std::array<std::uint8_t, 3>;

struct ColorStop {
    double position = 0.0;
    Rgb color{};
};

/// Piecewise-linear color ramp. Positions ascend from 0.0 to 1.0.
class ColorMap {
public:
    explicit ColorMap(std::vector<ColorStop> stops);

    const std::vector<ColorStop>& stops() const noexcept { return stops_; }

    // v is clamped to [0,1] first; channels are rounded half-up.
    Rgb color_at(double v) const;

private:
    std::vector<ColorStop> stops_;
};

// Blue, cyan, green, yellow, red at 0, 0.25, 0.5, 0.75, 1.
const ColorMap& default_colormap();

// round(v * 255) half-up after clamping v to [0,1].
std::uint8_t quantize_unit(double v);

struct RgbImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGB triples

    Rgb pixel(std::size_t y, std::size_t x) const;
};

// Binary P6 PPM bytes.
std::string encode_ppm(const RgbImage& img);
void write_ppm(const RgbImage& img, const std::filesystem::path& path);

// One zoom x zoom block per cell.
RgbImage heatmap_image(const Matrix& m, const ColorMap& cmap, std::size_t zoom = 1);
void render_heatmap(const Matrix& m, const ColorMap& cmap, const std::filesystem::path& path, std::size_t zoom = 1);

// image is [3,H,W] in [0,1]; grid is [h,w] and is upsampled to H x W,
// min-max normalized (constant grids map to 0.5) and blended as
// (1 - alpha) * image + alpha * color.
RgbImage overlay_image(const Tensor& image, const Tensor& grid, double alpha, const ColorMap& cmap);
void overlay_cam(const Tensor& image, const Tensor& grid, double alpha, const ColorMap& cmap,
                 const std::filesystem::path& path);

}  // namespace repscope::report
