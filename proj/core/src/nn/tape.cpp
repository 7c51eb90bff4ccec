#include "triprank/nn/tape.hpp"

#include "triprank/error.hpp"

namespace triprank::nn {

const Tensor& Var::value() const { return tape_->value(id_); }
Tensor& Var::grad() const { return tape_->grad(id_); }
bool Var::needs_grad() const { return tape_->needs_grad(id_); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::constant(Tensor value) { return push(Node{std::move(value), {}, nullptr, false, {}}); }

Var Tape::variable(Tensor value) { return push(Node{std::move(value), {}, nullptr, track_, {}}); }

Var Tape::parameter(Parameter& param) { return push(Node{{}, {}, &param, track_, {}}); }

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Pullback pullback) {
  bool needs = false;
  for (const Var& v : inputs) needs = needs || nodes_[v.id()].needs_grad;
  return push(Node{std::move(value), {}, nullptr, needs, needs ? std::move(pullback) : Pullback{}});
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, Pullback pullback) {
  bool needs = false;
  for (const Var& v : inputs) needs = needs || nodes_[v.id()].needs_grad;
  return push(Node{std::move(value), {}, nullptr, needs, needs ? std::move(pullback) : Pullback{}});
}

const Tensor& Tape::value(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.param != nullptr ? n.param->value : n.value;
}

Tensor& Tape::grad(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.param != nullptr) return n.param->grad;
  if (n.grad.shape() != n.value.shape() || n.grad.size() != n.value.size())
    n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Tape::backward(Var output, const Tensor& seed) {
  if (seed.size() != value(output.id()).size())
    throw ShapeMismatch("backward seed " + to_string(seed.shape()) + " for output " +
                        to_string(value(output.id()).shape()));
  Tensor& g = grad(output.id());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];
  for (std::uint32_t id = output.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.needs_grad || !n.pullback || n.grad.empty()) continue;
    n.pullback(*this, id);
  }
}

void Tape::backward(Var scalar_output) {
  backward(scalar_output, Tensor(value(scalar_output.id()).shape(), 1.0));
}

}  // namespace triprank::nn
