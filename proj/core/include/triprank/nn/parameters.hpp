#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "triprank/nn/tensor.hpp"

namespace triprank::nn {

/// Trainable tensor with its gradient slot and Adam moments.
struct Parameter {
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
};

class ParameterStore {
 public:
  using Map = std::map<std::string, Parameter>;

  /// Throws std::invalid_argument on a duplicate name.
  Parameter& add(const std::string& name, Tensor init);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.contains(name); }

  Map::iterator begin() noexcept { return params_.begin(); }
  Map::iterator end() noexcept { return params_.end(); }
  Map::const_iterator begin() const noexcept { return params_.begin(); }
  Map::const_iterator end() const noexcept { return params_.end(); }
  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const noexcept;

  void zero_grad() noexcept;
  std::uint64_t step() const noexcept { return step_; }

  /// Copies parameter values (not moments) from `other`; names and shapes must match.
  void copy_values_from(const ParameterStore& other);


 private:
  Map params_;
  std::uint64_t step_ = 0;
  friend void adam_step(ParameterStore&, const struct AdamConfig&);
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam update over every parameter, then zeroes gradients.
void adam_step(ParameterStore& store, const AdamConfig& config);

}  // namespace triprank::nn
