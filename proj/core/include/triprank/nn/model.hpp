#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "triprank/nn/layers.hpp"
#include "triprank/nn/ops.hpp"
#include "triprank/nn/parameters.hpp"
#include "triprank/nn/tape.hpp"

namespace triprank::nn {

struct ModelConfig {
  std::size_t city_emb_dim = 32;
  std::size_t country_emb_dim = 32;
  std::size_t affiliate_emb_dim = 5;
  std::size_t trip_len = 50;
  std::size_t model_dim = 115;
  std::size_t n_trip_blocks = 3;
  std::size_t n_candidate_blocks = 1;
  std::size_t n_heads = 5;
  std::size_t max_candidates = 500;
  std::size_t ff_multiplier = 2;

  std::size_t head_dim() const noexcept { return model_dim / n_heads; }
  std::size_t ff_dim() const noexcept { return ff_multiplier * model_dim; }
  /// city + booker country + hotel country + affiliate + engineered trip features.
  std::size_t trip_raw_width() const noexcept;
  /// city + country + engineered candidate features.
  std::size_t candidate_raw_width() const noexcept;

  /// Throws ConfigError when n_heads does not divide model_dim or a size is 0.
  void validate() const;

  /// `key=value` lines.
  std::map<std::string, std::string> to_entries() const;
  /// Applies known keys from `entries`; unknown keys are ignored.
  static ModelConfig from_entries(const std::map<std::string, std::string>& entries);
};

/// Number of rows in each embedding table (index 0 = unknown).
struct VocabSizes {
  std::size_t cities = 1;
  std::size_t countries = 1;
  std::size_t affiliates = 1;
};

/// Padded numeric inputs for one batch of ranking instances.
struct ModelBatch {
  std::size_t batch = 0;
  std::size_t trip_len = 0;
  std::size_t n_candidates = 0;

  std::vector<std::int32_t> trip_city;  // (batch, trip_len)
  std::vector<std::int32_t> trip_booker_country;
  std::vector<std::int32_t> trip_hotel_country;
  std::vector<std::int32_t> trip_affiliate;
  Tensor trip_features;  // (batch, trip_len, 23)
  Mask trip_mask;

  std::vector<std::int32_t> candidate_city;  // (batch, n_candidates)
  std::vector<std::int32_t> candidate_country;
  Tensor candidate_features;  // (batch, n_candidates, 15)
  Mask candidate_mask;

  Tensor target_features;  // (batch, 23)

  /// Zero-filled batch of the given padded sizes with every mask entry 0.
  static ModelBatch zeros(std::size_t batch, std::size_t trip_len, std::size_t n_candidates);
};

/// Two-stage reranker scoring network: trip encoder, candidate encoder,
/// candidate-to-trip attention, dot product with the encoded target context.
class RerankerModel {
 public:
  RerankerModel(ModelConfig config, VocabSizes vocab, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  const VocabSizes& vocab_sizes() const noexcept { return vocab_; }
  ParameterStore& params() noexcept { return params_; }
  const ParameterStore& params() const noexcept { return params_; }

  /// Trip city representations (batch, trip_len, model_dim); padded rows zero.
  Var encode_trip(Tape& tape, const ModelBatch& batch);
  /// Candidate representations (batch, n_candidates, model_dim); padded rows zero.
  Var encode_candidates(Tape& tape, const ModelBatch& batch);
  /// Dense encoding of the target context (batch, model_dim).
  Var encode_target(Tape& tape, const ModelBatch& batch);
  /// Cross attention of candidates over trip positions, multiplicative
  /// residual with the candidate encoding, then a dot product with the target
  /// encoding. (batch, n_candidates); padded candidate slots score 0.
  Var score(Tape& tape, Var trip_encoding, const Mask& trip_mask, Var candidate_encoding,
            const Mask& candidate_mask, Var target_encoding);

  Var forward(Tape& tape, const ModelBatch& batch);

  /// Scores without recording gradients; one vector per example, real slots only.
  std::vector<std::vector<double>> predict(const ModelBatch& batch);

 private:
  ModelConfig config_;
  VocabSizes vocab_;
  ParameterStore params_;
};

}  // namespace triprank::nn
