#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace repscope {

using Dims = std::vector<std::size_t>;

std::size_t element_count(const Dims& dims);
std::string dims_to_string(const Dims& dims);

/// Dense row-major f32 array. The last dimension is contiguous.
///
/// Construction enforces the invariants (non-empty dims, every extent >= 1,
/// product(dims) == data.size()); a Tensor that exists is always valid.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Dims dims);
    Tensor(Dims dims, std::vector<float> data);

    static Tensor zeros(Dims dims) { return Tensor(std::move(dims)); }

    const Dims& dims() const noexcept { return dims_; }
    std::size_t rank() const noexcept { return dims_.size(); }
    std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<float> values() noexcept { return data_; }
    std::span<const float> values() const noexcept { return data_; }
    float* data() noexcept { return data_.data(); }
    const float* data() const noexcept { return data_.data(); }

    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    // [C,H,W] accessors; caller guarantees rank 3.
    float& at(std::size_t c, std::size_t y, std::size_t x) {
        return data_[(c * dims_[1] + y) * dims_[2] + x];
    }
    float at(std::size_t c, std::size_t y, std::size_t x) const {
        return data_[(c * dims_[1] + y) * dims_[2] + x];
    }

    // Same data viewed under new dims with an equal element count.
    Tensor reshaped(Dims dims) const;

    bool all_finite() const noexcept;

    friend bool operator==(const Tensor& a, const Tensor& b);

private:
    Dims dims_;
    std::vector<float> data_;
};

// Bitwise equality of payloads (distinguishes -0.0 from 0.0 and compares NaN
// payloads); operator== uses float comparison.
bool bit_equal(const Tensor& a, const Tensor& b);

/// Small dense row-major f64 matrix used by the analysis modules
/// (features, distance matrices, embeddings).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

Tensor to_tensor(const Matrix& m);
Matrix to_matrix(const Tensor& t);

}  // namespace repscope
