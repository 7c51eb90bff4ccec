#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "triprank/nn/parameters.hpp"
#include "triprank/nn/tensor.hpp"

namespace triprank::nn {

class Tape;

/// Handle to a node recorded on a Tape. Valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  /// Gradient buffer; allocated (zeros) on first access.
  Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  bool needs_grad() const;

  Tape& tape() const noexcept { return *tape_; }
  std::uint32_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Reverse-mode recording. Ops append nodes in evaluation order; backward()
/// walks them in reverse, calling each node's pullback once.
class Tape {
 public:
  using Pullback = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  /// With `track_gradients` false, parameters bind as constants and no
  /// pullbacks are recorded (inference).
  explicit Tape(bool track_gradients) : track_(track_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf without gradient.
  Var constant(Tensor value);
  /// Leaf whose gradient is kept on the tape.
  Var variable(Tensor value);
  /// Leaf aliasing a stored parameter; gradients accumulate into `param.grad`.
  Var parameter(Parameter& param);

  /// Records an op result. The node needs a gradient when any input does.
  Var record(Tensor value, std::initializer_list<Var> inputs, Pullback pullback);
  Var record(Tensor value, const std::vector<Var>& inputs, Pullback pullback);

  const Tensor& value(std::uint32_t id) const;
  Tensor& grad(std::uint32_t id);
  bool needs_grad(std::uint32_t id) const { return nodes_[id].needs_grad; }

  /// Adds `seed` to the output gradient and propagates to every leaf.
  void backward(Var output, const Tensor& seed);
  /// backward() with seed 1 for a single-element output.
  void backward(Var scalar_output);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    bool needs_grad = false;
    Pullback pullback;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  bool track_ = true;
};

}  // namespace triprank::nn
