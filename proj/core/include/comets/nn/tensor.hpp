#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "comets/matrix.hpp"

namespace comets::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape) noexcept;
std::string shape_str(const Shape& shape);

/// Dense row-major n-d array of doubles. Sequence tensors are laid out
/// [batch, time, channel] with the channel index fastest.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    /// [rows, cols] copy of a matrix; stack() builds [n, rows, cols].
    static Tensor from_matrix(const Matrix& m);
    static Tensor stack(std::span<const Matrix> mats);
    /// Slice b of a rank-3 tensor as a matrix.
    Matrix matrix(std::size_t b) const;

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const noexcept { return data_.size(); }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::vector<double>& storage() noexcept { return data_; }
    const std::vector<double>& storage() const noexcept { return data_; }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    bool operator==(const Tensor&) const = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

}  // namespace comets::nn
