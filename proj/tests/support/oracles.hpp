#pragma once

// Independent reference computations. These are written from the textbook
// definitions with no shared code paths into the library.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "repscope/tensor.hpp"

namespace repscope::testing {

// Six nested loops, f64 accumulation, explicit bounds checks for padding.
Tensor conv_reference(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride,
                      std::size_t pad);

// sum((a-ma)(b-mb)) / sqrt(sum((a-ma)^2) sum((b-mb)^2)) in long double.
double pearson_reference(const std::vector<double>& a, const std::vector<double>& b);

// Average ranks by counting: rank = 1 + #less + (#equal - 1) / 2.
std::vector<double> ranks_reference(const std::vector<double>& v);

// Bilinear interpolation written as a weighted sum over the four neighbours
// with tent weights max(0, 1 - |s - i|).
Tensor bilinear_reference(const Tensor& grid, std::size_t out_h, std::size_t out_w);

// Central difference of f along every coordinate of x.
std::vector<double> central_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace repscope::testing
