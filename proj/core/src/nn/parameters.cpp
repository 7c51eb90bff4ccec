#include "triprank/nn/parameters.hpp"

#include <cmath>
#include <stdexcept>

#include "triprank/error.hpp"

namespace triprank::nn {

Parameter& ParameterStore::add(const std::string& name, Tensor init) {
  if (params_.contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  Parameter p;
  p.grad = Tensor(init.shape());
  p.m = Tensor(init.shape());
  p.v = Tensor(init.shape());
  p.value = std::move(init);
  return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParameterStore::at(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("no parameter '" + name + "'");
  return it->second;
}

const Parameter& ParameterStore::at(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("no parameter '" + name + "'");
  return it->second;
}

std::size_t ParameterStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() noexcept {
  for (auto& [name, p] : params_) p.grad.fill(0.0);
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  for (auto& [name, p] : params_) {
    const Parameter& src = other.at(name);
    if (!src.value.same_shape(p.value))
      throw ShapeMismatch("parameter '" + name + "' has shape " + to_string(src.value.shape()) +
                          ", expected " + to_string(p.value.shape()));
    p.value = src.value;
  }
}

void adam_step(ParameterStore& store, const AdamConfig& config) {
  ++store.step_;
  const double t = static_cast<double>(store.step_);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (auto& [name, p] : store.params_) {
    double* w = p.value.data();
    double* g = p.grad.data();
    double* m = p.m.data();
    double* v = p.v.data();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
      g[i] = 0.0;
    }
  }
}

}  // namespace triprank::nn
