#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "triprank/error.hpp"
#include "triprank/nn/model.hpp"
#include "triprank/random.hpp"

using namespace triprank;
using namespace triprank::nn;
using triprank::oracle::random_tensor;

namespace {

ModelConfig micro_config() {
  ModelConfig c;
  c.city_emb_dim = 4;
  c.country_emb_dim = 3;
  c.affiliate_emb_dim = 2;
  c.trip_len = 3;
  c.model_dim = 10;
  c.n_trip_blocks = 1;
  c.n_candidate_blocks = 1;
  c.n_heads = 2;
  c.max_candidates = 4;
  return c;
}

const VocabSizes kVocab{12, 6, 4};

struct ExampleSpec {
  std::vector<std::int32_t> trip_cities;
  std::vector<std::int32_t> candidates;
  std::uint64_t seed;
};

// Writes one example into row b of the batch; padded slots get junk ids and
// features so masking is exercised.
void fill_example(ModelBatch& m, std::size_t b, const ExampleSpec& e) {
  Rng rng(e.seed);
  const std::size_t tf = m.trip_features.last_dim();
  const std::size_t cf = m.candidate_features.last_dim();
  for (std::size_t p = 0; p < m.trip_len; ++p) {
    const std::size_t at = b * m.trip_len + p;
    const bool real = p < e.trip_cities.size();
    m.trip_city[at] = real ? e.trip_cities[p] : 7;
    m.trip_booker_country[at] = real ? static_cast<std::int32_t>(1 + p % 5) : 3;
    m.trip_hotel_country[at] = real ? static_cast<std::int32_t>(1 + (p * 3) % 5) : 2;
    m.trip_affiliate[at] = real ? 1 + static_cast<std::int32_t>(p % 3) : 2;
    for (std::size_t k = 0; k < tf; ++k)
      m.trip_features[at * tf + k] = real ? rng.uniform(-1.0, 1.0) : 5.0;
    m.trip_mask.at(b, p) = real ? 1.0 : 0.0;
  }
  for (std::size_t j = 0; j < m.n_candidates; ++j) {
    const std::size_t at = b * m.n_candidates + j;
    const bool real = j < e.candidates.size();
    m.candidate_city[at] = real ? e.candidates[j] : 9;
    m.candidate_country[at] = real ? 1 + e.candidates[j] % 5 : 4;
    for (std::size_t k = 0; k < cf; ++k)
      m.candidate_features[at * cf + k] = real ? rng.uniform(0.0, 1.0) : -3.0;
    m.candidate_mask.at(b, j) = real ? 1.0 : 0.0;
  }
  for (std::size_t k = 0; k < tf; ++k) m.target_features[b * tf + k] = rng.uniform(-1.0, 1.0);
}

ModelBatch make_batch(const std::vector<ExampleSpec>& examples, std::size_t trip_len,
                      std::size_t n_candidates) {
  ModelBatch m = ModelBatch::zeros(examples.size(), trip_len, n_candidates);
  for (std::size_t b = 0; b < examples.size(); ++b) fill_example(m, b, examples[b]);
  return m;
}

double mean_score(RerankerModel& model, const ModelBatch& batch) {
  Tape tape(false);
  return mean(model.forward(tape, batch)).value()[0];
}

const ExampleSpec kA{{1, 2, 3}, {4, 5, 1, 6}, 101};
const ExampleSpec kB{{8, 2}, {3, 10, 11}, 102};

}  // namespace

TEST(ModelConfig, Validation) {
  ModelConfig c = micro_config();
  c.n_heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = micro_config();
  c.trip_len = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(ModelConfig{}.validate());
  EXPECT_EQ(ModelConfig{}.head_dim(), 23u);
}

TEST(ModelConfig, EntriesRoundTrip) {
  const ModelConfig c = micro_config();
  const ModelConfig back = ModelConfig::from_entries(c.to_entries());
  EXPECT_EQ(back.to_entries(), c.to_entries());
  EXPECT_THROW(ModelConfig::from_entries({{"model_dim", "ten"}}), ConfigError);
}

TEST(RerankerModel, OutputShapes) {
  RerankerModel model(micro_config(), kVocab, 1);
  const ModelBatch batch = make_batch({kA, kB}, 3, 4);
  Tape tape(false);
  EXPECT_EQ(model.encode_trip(tape, batch).shape(), (Shape{2, 3, 10}));
  EXPECT_EQ(model.encode_candidates(tape, batch).shape(), (Shape{2, 4, 10}));
  EXPECT_EQ(model.encode_target(tape, batch).shape(), (Shape{2, 10}));
  EXPECT_EQ(model.forward(tape, batch).shape(), (Shape{2, 4}));
  const auto scores = model.predict(batch);
  ASSERT_EQ(scores.size(), 2u);
  EXPECT_EQ(scores[0].size(), 4u);
  EXPECT_EQ(scores[1].size(), 3u);
}

TEST(RerankerModel, PaddedCandidateSlotsScoreZero) {
  RerankerModel model(micro_config(), kVocab, 2);
  const ModelBatch batch = make_batch({kB}, 3, 4);
  Tape tape(false);
  EXPECT_EQ(model.forward(tape, batch).value()[3], 0.0);
}

TEST(RerankerModel, SameSeedSameParameters) {
  RerankerModel a(micro_config(), kVocab, 5);
  RerankerModel b(micro_config(), kVocab, 5);
  RerankerModel c(micro_config(), kVocab, 6);
  EXPECT_EQ(a.params().at("trip_input.weight").value, b.params().at("trip_input.weight").value);
  EXPECT_NE(a.params().at("trip_input.weight").value, c.params().at("trip_input.weight").value);
}

TEST(RerankerModel, IdenticalTripsEncodeIdentically) {
  RerankerModel model(micro_config(), kVocab, 3);
  ExampleSpec twin = kA;
  twin.candidates = {2, 9};
  // Same seed for the features keeps trip inputs equal; candidates differ.
  const ModelBatch batch = make_batch({kA, twin}, 3, 4);
  Tape tape(false);
  const Tensor& enc = model.encode_trip(tape, batch).value();
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(enc[i], enc[30 + i]);
}

TEST(RerankerModel, PermutedCitiesChangeEncoding) {
  RerankerModel model(micro_config(), kVocab, 4);
  ExampleSpec permuted = kA;
  permuted.trip_cities = {3, 1, 2};
  const ModelBatch batch = make_batch({kA, permuted}, 3, 4);
  Tape tape(false);
  const Tensor& enc = model.encode_trip(tape, batch).value();
  double diff = 0.0;
  for (std::size_t i = 0; i < 30; ++i) diff += std::abs(enc[i] - enc[30 + i]);
  EXPECT_GT(diff, 1e-6);
}

TEST(RerankerModel, PaddingAndBatchIndependence) {
  ModelConfig cfg = micro_config();
  cfg.trip_len = 6;
  cfg.max_candidates = 8;
  RerankerModel model(cfg, kVocab, 7);
  const auto alone = model.predict(make_batch({kB}, 6, 3))[0];
  const auto padded = model.predict(make_batch({kB}, 6, 8))[0];
  const auto with_other = model.predict(make_batch({kA, kB}, 6, 8))[1];
  const auto other_first = model.predict(make_batch({kB, kA}, 6, 5))[0];
  ASSERT_EQ(alone.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(padded[j], alone[j], 1e-10);
    EXPECT_NEAR(with_other[j], alone[j], 1e-10);
    EXPECT_NEAR(other_first[j], alone[j], 1e-10);
  }
}

TEST(RerankerModel, ZeroTargetEncodingGivesZeroScores) {
  RerankerModel model(micro_config(), kVocab, 8);
  model.params().at("target_input.weight").value.fill(0.0);
  model.params().at("target_input.bias").value.fill(0.0);
  for (const auto& row : model.predict(make_batch({kA, kB}, 3, 4)))
    for (const double s : row) EXPECT_EQ(s, 0.0);
}

TEST(RerankerModel, CityEmbeddingSharedByTripAndCandidates) {
  RerankerModel model(micro_config(), kVocab, 9);
  const ModelBatch batch = make_batch({kA, kB}, 3, 4);
  Tape tape;
  tape.backward(mean(model.forward(tape, batch)));
  const Tensor& g = model.params().at("city_embedding").grad;
  const auto row_norm = [&](std::size_t r) {
    double s = 0.0;
    for (const double v : g.row(r)) s += std::abs(v);
    return s;
  };
  EXPECT_GT(row_norm(2), 0.0);   // trip only
  EXPECT_GT(row_norm(5), 0.0);   // candidate only
  EXPECT_GT(row_norm(1), 0.0);   // both
  EXPECT_EQ(row_norm(0), 0.0);   // unused
  EXPECT_EQ(row_norm(7), 0.0);   // trip padding id
  EXPECT_EQ(row_norm(9), 0.0);   // candidate padding id
}

TEST(RerankerModel, EndToEndGradientCheck) {
  RerankerModel model(micro_config(), kVocab, 10);
  // Nonzero shifts and biases so every parameter participates.
  Rng rng(11);
  for (auto& [name, p] : model.params())
    for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] += rng.uniform(-0.1, 0.1);
  const ModelBatch batch = make_batch({kA, kB}, 3, 4);
  {
    Tape tape;
    tape.backward(mean(model.forward(tape, batch)));
  }
  const double h = 1e-5;
  double worst = 0.0;
  std::string worst_name;
  std::size_t checked = 0;
  for (auto& [name, p] : model.params()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + h;
      const double up = mean_score(model, batch);
      p.value[i] = saved - h;
      const double down = mean_score(model, batch);
      p.value[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = p.grad[i];
      const double rel =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      if (rel > worst) {
        worst = rel;
        worst_name = name;
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, model.params().scalar_count());
  EXPECT_LT(worst, 1e-3) << "worst parameter " << worst_name;
}
