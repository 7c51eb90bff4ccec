#include "triprank/nn/layers.hpp"

#include <cmath>

#include "triprank/error.hpp"

namespace triprank::nn {

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (auto& v : t.values()) v = rng.uniform(-limit, limit);
  return t;
}

void add_embedding(ParameterStore& store, const std::string& name, std::size_t rows,
                   std::size_t width, Rng& rng) {
  store.add(name, glorot_uniform(rows, width, rng));
}

void add_dense(ParameterStore& store, const std::string& name, std::size_t d_in,
               std::size_t d_out, Rng& rng) {
  store.add(name + ".weight", glorot_uniform(d_in, d_out, rng));
  store.add(name + ".bias", Tensor({d_out}));
}

void add_norm(ParameterStore& store, const std::string& name, std::size_t width) {
  store.add(name + ".gain", Tensor({width}, 1.0));
  store.add(name + ".shift", Tensor({width}));
}

void add_attention(ParameterStore& store, const std::string& name, std::size_t width, Rng& rng) {
  for (const char* part : {".query", ".key", ".value", ".output"})
    add_dense(store, name + part, width, width, rng);
}

void add_mul_block(ParameterStore& store, const std::string& name, std::size_t width,
                   std::size_t ff_width, Rng& rng) {
  add_attention(store, name + ".attention", width, rng);
  add_norm(store, name + ".norm1", width);
  add_dense(store, name + ".ff_in", width, ff_width, rng);
  add_dense(store, name + ".ff_out", ff_width, width, rng);
  add_norm(store, name + ".norm2", width);
}

DenseVars bind_dense(Tape& tape, ParameterStore& store, const std::string& name) {
  return {tape.parameter(store.at(name + ".weight")), tape.parameter(store.at(name + ".bias"))};
}

NormVars bind_norm(Tape& tape, ParameterStore& store, const std::string& name) {
  return {tape.parameter(store.at(name + ".gain")), tape.parameter(store.at(name + ".shift"))};
}

AttentionVars bind_attention(Tape& tape, ParameterStore& store, const std::string& name) {
  return {bind_dense(tape, store, name + ".query"), bind_dense(tape, store, name + ".key"),
          bind_dense(tape, store, name + ".value"), bind_dense(tape, store, name + ".output")};
}

MulBlockVars bind_mul_block(Tape& tape, ParameterStore& store, const std::string& name) {
  return {bind_attention(tape, store, name + ".attention"), bind_norm(tape, store, name + ".norm1"),
          bind_dense(tape, store, name + ".ff_in"), bind_dense(tape, store, name + ".ff_out"),
          bind_norm(tape, store, name + ".norm2")};
}

Var multi_head_attention(Var queries_src, Var keys_values_src, const Mask& key_mask,
                         std::size_t heads, const AttentionVars& params,
                         std::vector<double>* weights_out) {
  const Var q = apply(params.query, queries_src);
  const Var k = apply(params.key, keys_values_src);
  const Var v = apply(params.value, keys_values_src);
  const Var attended = scaled_dot_attention(q, k, v, key_mask, heads, weights_out);
  Var out = apply(params.output, attended);

  const std::size_t batch = key_mask.batch;
  const std::size_t n_q = queries_src.value().dim(1);
  std::vector<double> keep(batch * n_q, 1.0);
  bool any_empty = false;
  for (std::size_t b = 0; b < batch; ++b) {
    if (key_mask.count(b) > 0) continue;
    any_empty = true;
    std::fill(keep.begin() + static_cast<std::ptrdiff_t>(b * n_q),
              keep.begin() + static_cast<std::ptrdiff_t>((b + 1) * n_q), 0.0);
  }
  return any_empty ? scale_rows(out, keep) : out;
}

Var mul_residual(Var x, Var sublayer, const NormVars& norm) { return apply(norm, mul(x, sublayer)); }

Var feed_forward(Var x, const DenseVars& in, const DenseVars& out) {
  return apply(out, relu(apply(in, x)));
}

Var transformer_mul_block(Var x, const Mask& mask, std::size_t heads, const MulBlockVars& params) {
  const Var attended = multi_head_attention(x, x, mask, heads, params.attention);
  const Var stage1 = mul_residual(x, attended, params.norm1);
  const Var stage2 = mul_residual(stage1, feed_forward(stage1, params.ff_in, params.ff_out),
                                  params.norm2);
  return scale_rows(stage2, mask.values);
}

Var positional_combine(Var city_repr, const Mask& mask, Var start_table, Var end_table,
                       const DenseVars& combine) {
  const std::size_t B = mask.batch, N = mask.length;
  const std::size_t table_rows = start_table.value().dim(0);
  std::vector<std::int32_t> from_start(B * N, 0), from_end(B * N, 0);
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t len = mask.count(b);
    if (len > table_rows || len > end_table.value().dim(0))
      throw ShapeMismatch("positional_combine: trip of length " + std::to_string(len) +
                          " exceeds positional table of " + std::to_string(table_rows));
    for (std::size_t p = 0; p < len; ++p) {
      from_start[b * N + p] = static_cast<std::int32_t>(p);
      from_end[b * N + p] = static_cast<std::int32_t>(len - 1 - p);
    }
  }
  const Var parts[] = {gather_rows(start_table, from_start, {B, N}),
                       gather_rows(end_table, from_end, {B, N})};
  const Var positional = apply(combine, concat_last(parts));
  return scale_rows(mul(city_repr, positional), mask.values);
}

}  // namespace triprank::nn
