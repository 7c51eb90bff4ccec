#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "triprank/dataset.hpp"
#include "triprank/random.hpp"

namespace triprank {

/// A trip split into a known prefix and labelled continuation cities.
struct LabeledInstance {
  std::size_t prefix_length = 0;
  /// Target cities nearest-first with labels 1, 1/2, 1/4, ...
  std::vector<std::pair<CityIndex, double>> targets;

  /// Label of `city` (its nearest occurrence among targets) or 0.
  double label_of(CityIndex city) const noexcept;
};

struct LabelConfig {
  double min_fraction = 0.1;
  double max_fraction = 0.5;
};

/// Draws f ~ U[min, max], holds out max(1, round(f * len)) trailing checkins
/// (at most len - 1) and labels the i-th of them 2^-i. Throws TripTooShort
/// for trips shorter than 2.
LabeledInstance make_labels(std::span<const EncodedCheckin> trip, Rng& rng,
                            const LabelConfig& config = {});

/// Ranking induced by scores: descending, ascending index on ties.
std::vector<std::size_t> rank_order(std::span<const double> scores);

/// NDCG@k with linear gain. Returns 1 when every label is 0. Throws LengthMismatch.
double ndcg_at_k(std::span<const double> scores, std::span<const double> labels, std::size_t k);

/// 1 when `truth` is within the first k entries of `ranked`.
int accuracy_at_k(std::span<const CityIndex> ranked, CityIndex truth, std::size_t k = 4);

struct LambdaConfig {
  double sigma = 1.0;
  std::size_t truncation = 40;
};

/// LambdaRANK gradients (ascent direction on NDCG@K) for one list. Each pair
/// with label_i > label_j contributes
///   sigma / (1 + exp(sigma (s_i - s_j))) * |delta NDCG@K(i <-> j)|
/// to lambda_i and the negation to lambda_j. Throws LengthMismatch when the
/// lengths differ or the list has fewer than two items.
std::vector<double> lambdarank_gradients(std::span<const double> scores,
                                         std::span<const double> labels,
                                         const LambdaConfig& config = {});

/// Pooled two-proportion z-test, two-tailed p-value. 1.0 when the pooled
/// variance is zero.
double two_proportion_z_test(std::size_t successes_a, std::size_t successes_b, std::size_t n);

}  // namespace triprank
