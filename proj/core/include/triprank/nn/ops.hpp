#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "triprank/nn/tape.hpp"

namespace triprank::nn {

/// 0/1 validity per (example, position).
struct Mask {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::vector<double> values;

  Mask() = default;
  Mask(std::size_t b, std::size_t n, double fill = 1.0) : batch(b), length(n), values(b * n, fill) {}

  double at(std::size_t b, std::size_t i) const noexcept { return values[b * length + i]; }
  double& at(std::size_t b, std::size_t i) noexcept { return values[b * length + i]; }
  std::size_t count(std::size_t b) const noexcept;
};

Var add(Var a, Var b);
Var mul(Var a, Var b);
Var relu(Var x);
Var scale(Var x, double factor);
/// Sum of all elements, shape {1}.
Var sum(Var x);
Var mean(Var x);

/// y = x W + b over the last axis; x (..., d_in), W (d_in, d_out), b (d_out).
Var dense(Var x, Var weight, Var bias);

/// Per-row standardization then gain * x_hat + shift.
Var layer_norm(Var x, Var gain, Var shift, double eps = 1e-5);

/// Concatenation along the last axis; every input must have the same rows.
Var concat_last(std::span<const Var> parts);

/// Rows of `table` (vocab, d) selected by `indices`; output shape index_shape + (d).
Var gather_rows(Var table, std::span<const std::int32_t> indices, const Shape& index_shape);

/// Multiplies row r of x by row_scale[r] (a constant).
Var scale_rows(Var x, std::span<const double> row_scale);

/// Per-head softmax(Q K^T / sqrt(d_head)) V over unmasked keys.
/// Q (b, n_q, d), K and V (b, n_kv, d), key_mask (b, n_kv). Rows whose keys are
/// all masked produce zeros. `weights_out`, when given, receives the attention
/// weights laid out (b, heads, n_q, n_kv).
Var scaled_dot_attention(Var q, Var k, Var v, const Mask& key_mask, std::size_t heads,
                         std::vector<double>* weights_out = nullptr);

/// out[b, n] = dot(a[b, n, :], f[b, :]).
Var rowdot(Var a, Var f);

}  // namespace triprank::nn
