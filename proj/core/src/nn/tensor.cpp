#include "triprank/nn/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "triprank/error.hpp"

namespace triprank::nn {

std::size_t element_count(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != element_count(shape_))
    throw ShapeMismatch("tensor of shape " + to_string(shape_) + " given " +
                        std::to_string(data_.size()) + " values");
}

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

}  // namespace triprank::nn
