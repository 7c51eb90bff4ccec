#include "triprank/nn/model.hpp"

#include <charconv>

#include "triprank/error.hpp"
#include "triprank/features.hpp"

namespace triprank::nn {

std::size_t ModelConfig::trip_raw_width() const noexcept {
  return city_emb_dim + 2 * country_emb_dim + affiliate_emb_dim + kTripCityFeatureCount;
}

std::size_t ModelConfig::candidate_raw_width() const noexcept {
  return city_emb_dim + country_emb_dim + kCandidateFeatureCount;
}

void ModelConfig::validate() const {
  if (city_emb_dim == 0 || country_emb_dim == 0 || affiliate_emb_dim == 0 || model_dim < 2 ||
      trip_len == 0 || n_trip_blocks == 0 || n_candidate_blocks == 0 || n_heads == 0 ||
      max_candidates == 0 || ff_multiplier == 0)
    throw ConfigError("model config: every size must be positive");
  if (model_dim % n_heads != 0)
    throw ConfigError("model config: n_heads " + std::to_string(n_heads) +
                      " does not divide model_dim " + std::to_string(model_dim));
}

std::map<std::string, std::string> ModelConfig::to_entries() const {
  return {
      {"city_emb_dim", std::to_string(city_emb_dim)},
      {"country_emb_dim", std::to_string(country_emb_dim)},
      {"affiliate_emb_dim", std::to_string(affiliate_emb_dim)},
      {"trip_len", std::to_string(trip_len)},
      {"model_dim", std::to_string(model_dim)},
      {"n_trip_blocks", std::to_string(n_trip_blocks)},
      {"n_candidate_blocks", std::to_string(n_candidate_blocks)},
      {"n_heads", std::to_string(n_heads)},
      {"max_candidates", std::to_string(max_candidates)},
      {"ff_multiplier", std::to_string(ff_multiplier)},
  };
}

ModelConfig ModelConfig::from_entries(const std::map<std::string, std::string>& entries) {
  ModelConfig c;
  const auto read = [&](const char* key, std::size_t& field) {
    const auto it = entries.find(key);
    if (it == entries.end()) return;
    const auto& text = it->second;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), field);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      throw ConfigError(std::string("model config: bad value for ") + key + ": '" + text + "'");
  };
  read("city_emb_dim", c.city_emb_dim);
  read("country_emb_dim", c.country_emb_dim);
  read("affiliate_emb_dim", c.affiliate_emb_dim);
  read("trip_len", c.trip_len);
  read("model_dim", c.model_dim);
  read("n_trip_blocks", c.n_trip_blocks);
  read("n_candidate_blocks", c.n_candidate_blocks);
  read("n_heads", c.n_heads);
  read("max_candidates", c.max_candidates);
  read("ff_multiplier", c.ff_multiplier);
  return c;
}

ModelBatch ModelBatch::zeros(std::size_t batch, std::size_t trip_len, std::size_t n_candidates) {
  ModelBatch m;
  m.batch = batch;
  m.trip_len = trip_len;
  m.n_candidates = n_candidates;
  const std::size_t nt = batch * trip_len;
  const std::size_t nc = batch * n_candidates;
  m.trip_city.assign(nt, 0);
  m.trip_booker_country.assign(nt, 0);
  m.trip_hotel_country.assign(nt, 0);
  m.trip_affiliate.assign(nt, 0);
  m.trip_features = Tensor({batch, trip_len, kTripCityFeatureCount});
  m.trip_mask = Mask(batch, trip_len, 0.0);
  m.candidate_city.assign(nc, 0);
  m.candidate_country.assign(nc, 0);
  m.candidate_features = Tensor({batch, n_candidates, kCandidateFeatureCount});
  m.candidate_mask = Mask(batch, n_candidates, 0.0);
  m.target_features = Tensor({batch, kTripCityFeatureCount});
  return m;
}

RerankerModel::RerankerModel(ModelConfig config, VocabSizes vocab, std::uint64_t seed)
    : config_(config), vocab_(vocab) {
  config_.validate();
  Rng rng(seed);
  const std::size_t d = config_.model_dim;
  add_embedding(params_, "city_embedding", vocab_.cities, config_.city_emb_dim, rng);
  add_embedding(params_, "country_embedding", vocab_.countries, config_.country_emb_dim, rng);
  add_embedding(params_, "affiliate_embedding", vocab_.affiliates, config_.affiliate_emb_dim, rng);

  add_dense(params_, "trip_input", config_.trip_raw_width(), d, rng);
  add_embedding(params_, "position_start", config_.trip_len, d / 2, rng);
  add_embedding(params_, "position_end", config_.trip_len, d - d / 2, rng);
  add_dense(params_, "position_combine", d, d, rng);
  for (std::size_t i = 0; i < config_.n_trip_blocks; ++i)
    add_mul_block(params_, "trip_block" + std::to_string(i), d, config_.ff_dim(), rng);

  add_dense(params_, "candidate_input", config_.candidate_raw_width(), d, rng);
  for (std::size_t i = 0; i < config_.n_candidate_blocks; ++i)
    add_mul_block(params_, "candidate_block" + std::to_string(i), d, config_.ff_dim(), rng);

  add_attention(params_, "cross_attention", d, rng);
  add_norm(params_, "score_norm", d);
  add_dense(params_, "target_input", kTripCityFeatureCount, d, rng);
}

Var RerankerModel::encode_trip(Tape& tape, const ModelBatch& batch) {
  const Shape index_shape{batch.batch, batch.trip_len};
  const Var city_table = tape.parameter(params_.at("city_embedding"));
  const Var country_table = tape.parameter(params_.at("country_embedding"));
  const Var affiliate_table = tape.parameter(params_.at("affiliate_embedding"));

  const Var parts[] = {
      gather_rows(city_table, batch.trip_city, index_shape),
      gather_rows(country_table, batch.trip_booker_country, index_shape),
      gather_rows(country_table, batch.trip_hotel_country, index_shape),
      gather_rows(affiliate_table, batch.trip_affiliate, index_shape),
      tape.constant(batch.trip_features),
  };
  Var x = apply(bind_dense(tape, params_, "trip_input"), concat_last(parts));
  x = scale_rows(x, batch.trip_mask.values);
  x = positional_combine(x, batch.trip_mask, tape.parameter(params_.at("position_start")),
                         tape.parameter(params_.at("position_end")),
                         bind_dense(tape, params_, "position_combine"));
  for (std::size_t i = 0; i < config_.n_trip_blocks; ++i)
    x = transformer_mul_block(x, batch.trip_mask, config_.n_heads,
                              bind_mul_block(tape, params_, "trip_block" + std::to_string(i)));
  return x;
}

Var RerankerModel::encode_candidates(Tape& tape, const ModelBatch& batch) {
  const Shape index_shape{batch.batch, batch.n_candidates};
  const Var parts[] = {
      gather_rows(tape.parameter(params_.at("city_embedding")), batch.candidate_city, index_shape),
      gather_rows(tape.parameter(params_.at("country_embedding")), batch.candidate_country,
                  index_shape),
      tape.constant(batch.candidate_features),
  };
  Var x = apply(bind_dense(tape, params_, "candidate_input"), concat_last(parts));
  x = scale_rows(x, batch.candidate_mask.values);
  for (std::size_t i = 0; i < config_.n_candidate_blocks; ++i)
    x = transformer_mul_block(x, batch.candidate_mask, config_.n_heads,
                              bind_mul_block(tape, params_, "candidate_block" + std::to_string(i)));
  return x;
}

Var RerankerModel::encode_target(Tape& tape, const ModelBatch& batch) {
  return apply(bind_dense(tape, params_, "target_input"), tape.constant(batch.target_features));
}

Var RerankerModel::score(Tape& tape, Var trip_encoding, const Mask& trip_mask,
                         Var candidate_encoding, const Mask& candidate_mask,
                         Var target_encoding) {
  const Var cross = multi_head_attention(candidate_encoding, trip_encoding, trip_mask,
                                         config_.n_heads,
                                         bind_attention(tape, params_, "cross_attention"));
  const Var pair_repr = mul_residual(candidate_encoding, cross, bind_norm(tape, params_, "score_norm"));
  const Var scores = rowdot(pair_repr, target_encoding);
  return mul(scores, tape.constant(Tensor({candidate_mask.batch, candidate_mask.length},
                                          candidate_mask.values)));
}

Var RerankerModel::forward(Tape& tape, const ModelBatch& batch) {
  const Var trip = encode_trip(tape, batch);
  const Var candidates = encode_candidates(tape, batch);
  const Var target = encode_target(tape, batch);
  return score(tape, trip, batch.trip_mask, candidates, batch.candidate_mask, target);
}

std::vector<std::vector<double>> RerankerModel::predict(const ModelBatch& batch) {
  Tape tape(false);
  const Tensor& scores = forward(tape, batch).value();
  std::vector<std::vector<double>> out(batch.batch);
  for (std::size_t b = 0; b < batch.batch; ++b) {
    const std::size_t n = batch.candidate_mask.count(b);
    out[b].assign(scores.data() + b * batch.n_candidates,
                  scores.data() + b * batch.n_candidates + n);
  }
  return out;
}

}  // namespace triprank::nn
