#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "triprank/nn/ops.hpp"
#include "triprank/nn/parameters.hpp"
#include "triprank/random.hpp"

namespace triprank::nn {

// Parameter registration. Weights and embeddings are Glorot-uniform,
// biases and shifts 0, gains 1.
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);
void add_embedding(ParameterStore& store, const std::string& name, std::size_t rows,
                   std::size_t width, Rng& rng);
void add_dense(ParameterStore& store, const std::string& name, std::size_t d_in,
               std::size_t d_out, Rng& rng);
void add_norm(ParameterStore& store, const std::string& name, std::size_t width);
void add_attention(ParameterStore& store, const std::string& name, std::size_t width, Rng& rng);
void add_mul_block(ParameterStore& store, const std::string& name, std::size_t width,
                   std::size_t ff_width, Rng& rng);

struct DenseVars {
  Var weight;
  Var bias;
};
struct NormVars {
  Var gain;
  Var shift;
};
struct AttentionVars {
  DenseVars query;
  DenseVars key;
  DenseVars value;
  DenseVars output;
};
struct MulBlockVars {
  AttentionVars attention;
  NormVars norm1;
  DenseVars ff_in;
  DenseVars ff_out;
  NormVars norm2;
};

DenseVars bind_dense(Tape& tape, ParameterStore& store, const std::string& name);
NormVars bind_norm(Tape& tape, ParameterStore& store, const std::string& name);
AttentionVars bind_attention(Tape& tape, ParameterStore& store, const std::string& name);
MulBlockVars bind_mul_block(Tape& tape, ParameterStore& store, const std::string& name);

inline Var apply(const DenseVars& layer, Var x) { return dense(x, layer.weight, layer.bias); }
inline Var apply(const NormVars& norm, Var x) { return layer_norm(x, norm.gain, norm.shift); }

/// Query/key/value projections, per-head scaled dot-product attention over
/// unmasked keys, concatenated heads, output projection. Examples whose keys
/// are all masked produce zero rows.
Var multi_head_attention(Var queries_src, Var keys_values_src, const Mask& key_mask,
                         std::size_t heads, const AttentionVars& params,
                         std::vector<double>* weights_out = nullptr);

/// LayerNorm(x ⊙ sublayer): the multiplicative residual combiner.
Var mul_residual(Var x, Var sublayer, const NormVars& norm);

/// d -> ff -> d with ReLU.
Var feed_forward(Var x, const DenseVars& in, const DenseVars& out);

/// Self-attention stage then feed-forward stage, each wired through
/// mul_residual. Padded rows of the output are zeroed.
Var transformer_mul_block(Var x, const Mask& mask, std::size_t heads, const MulBlockVars& params);

/// For position p of a trip with true length L, concatenates start[p] and
/// end[L - 1 - p], projects through `combine`, and multiplies elementwise
/// with the city representation. Padded rows stay zero. Real positions must
/// form a prefix of each row of the mask.
Var positional_combine(Var city_repr, const Mask& mask, Var start_table, Var end_table,
                       const DenseVars& combine);

}  // namespace triprank::nn
