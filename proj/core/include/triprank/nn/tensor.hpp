#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace triprank::nn {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape) noexcept;
std::string to_string(const Shape& shape);

/// Dense row-major 64-bit tensor.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  /// Throws ShapeMismatch when values.size() != element_count(shape).
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  /// Size of the last axis (1 for rank 0).
  std::size_t last_dim() const noexcept { return shape_.empty() ? 1 : shape_.back(); }
  /// Number of rows when viewed as (size / last_dim, last_dim).
  std::size_t rows() const noexcept { return last_dim() == 0 ? 0 : size() / last_dim(); }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * last_dim(), last_dim()}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * last_dim(), last_dim()};
  }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  void fill(double value) noexcept;
  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace triprank::nn
