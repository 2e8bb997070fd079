#include "repscope/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "repscope/error.hpp"

namespace repscope {

std::size_t element_count(const Dims& dims) {
    if (dims.empty()) {
        fail(Errc::ShapeMismatch, "tensor dims must be non-empty");
    }
    std::size_t n = 1;
    for (std::size_t d : dims) {
        if (d == 0) {
            fail(Errc::ShapeMismatch, "tensor extent must be >= 1, got " + dims_to_string(dims));
        }
        if (n > std::numeric_limits<std::size_t>::max() / d) {
            fail(Errc::ShapeMismatch, "tensor element count overflows");
        }
        n *= d;
    }
    return n;
}

std::string dims_to_string(const Dims& dims) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i != 0) {
            os << ',';
        }
        os << dims[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Dims dims) : dims_(std::move(dims)) {
    data_.assign(element_count(dims_), 0.0f);
}

Tensor::Tensor(Dims dims, std::vector<float> data) : dims_(std::move(dims)), data_(std::move(data)) {
    const std::size_t n = element_count(dims_);
    if (n != data_.size()) {
        fail(Errc::ShapeMismatch, "dims " + dims_to_string(dims_) + " need " + std::to_string(n) +
                                      " values, got " + std::to_string(data_.size()));
    }
}

Tensor Tensor::reshaped(Dims dims) const {
    return Tensor(std::move(dims), data_);
}

bool Tensor::all_finite() const noexcept {
    for (float v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    if (a.dims() != b.dims()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::bit_cast<std::uint32_t>(a[i]) != std::bit_cast<std::uint32_t>(b[i])) {
            return false;
        }
    }
    return true;
}

Tensor to_tensor(const Matrix& m) {
    std::vector<float> data(m.data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = static_cast<float>(m.data[i]);
    }
    return Tensor({m.rows, m.cols}, std::move(data));
}

Matrix to_matrix(const Tensor& t) {
    if (t.rank() != 2) {
        fail(Errc::ShapeMismatch, "expected a rank-2 tensor, got " + dims_to_string(t.dims()));
    }
    Matrix m(t.dim(0), t.dim(1));
    for (std::size_t i = 0; i < t.size(); ++i) {
        m.data[i] = t[i];
    }
    return m;
}

}  // namespace repscope
