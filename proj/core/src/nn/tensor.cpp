#include "comets/nn/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "comets/error.hpp"

namespace comets::nn {

std::size_t numel(const Shape& shape) noexcept {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != numel(shape_)) {
        throw ShapeError("Tensor", std::to_string(numel(shape_)) + " elements",
                         std::to_string(data_.size()) + " elements");
    }
}

Tensor Tensor::from_matrix(const Matrix& m) { return Tensor({m.rows(), m.cols()}, m.data()); }

Tensor Tensor::stack(std::span<const Matrix> mats) {
    if (mats.empty()) return Tensor({0, 0, 0});
    const auto rows = mats[0].rows(), cols = mats[0].cols();
    Tensor out({mats.size(), rows, cols});
    for (std::size_t i = 0; i < mats.size(); ++i) {
        if (mats[i].rows() != rows || mats[i].cols() != cols) {
            throw ShapeError("Tensor::stack", shape_str({rows, cols}),
                             shape_str({mats[i].rows(), mats[i].cols()}));
        }
        std::copy(mats[i].data().begin(), mats[i].data().end(),
                  out.data_.begin() + static_cast<std::ptrdiff_t>(i * rows * cols));
    }
    return out;
}

Matrix Tensor::matrix(std::size_t b) const {
    if (rank() != 3) throw ShapeError("Tensor::matrix", "rank 3", shape_str(shape_));
    const auto rows = shape_[1], cols = shape_[2];
    const auto begin = data_.begin() + static_cast<std::ptrdiff_t>(b * rows * cols);
    return Matrix(rows, cols, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(rows * cols)));
}

}  // namespace comets::nn
