#include "triprank/ltr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "triprank/error.hpp"

namespace triprank {

namespace {

// Lambdas are summed as integers on this grid so that sum(lambda) is exactly zero.
constexpr double kLambdaGrid = 0x1.0p40;

double discount(std::size_t rank_zero_based) {
  return 1.0 / std::log2(static_cast<double>(rank_zero_based) + 2.0);
}

double ideal_dcg(std::span<const double> labels, std::size_t k) {
  std::vector<double> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, sorted.size()); ++r) idcg += sorted[r] * discount(r);
  return idcg;
}

}  // namespace

double LabeledInstance::label_of(CityIndex city) const noexcept {
  for (const auto& [c, label] : targets)
    if (c == city) return label;
  return 0.0;
}

LabeledInstance make_labels(std::span<const EncodedCheckin> trip, Rng& rng,
                            const LabelConfig& config) {
  if (trip.size() < 2) throw TripTooShort("make_labels: trip needs at least 2 checkins");
  const double fraction = rng.uniform(config.min_fraction, config.max_fraction);
  const auto len = static_cast<double>(trip.size());
  auto n_targets = static_cast<std::size_t>(std::max(1.0, std::round(fraction * len)));
  n_targets = std::min(n_targets, trip.size() - 1);

  LabeledInstance out;
  out.prefix_length = trip.size() - n_targets;
  double label = 1.0;
  for (std::size_t i = out.prefix_length; i < trip.size(); ++i, label *= 0.5)
    out.targets.emplace_back(trip[i].city, label);
  return out;
}

std::vector<std::size_t> rank_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

double ndcg_at_k(std::span<const double> scores, std::span<const double> labels, std::size_t k) {
  if (scores.size() != labels.size()) throw LengthMismatch(scores.size(), labels.size());
  const double idcg = ideal_dcg(labels, k);
  if (idcg <= 0.0) return 1.0;
  const auto order = rank_order(scores);
  double dcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, order.size()); ++r) dcg += labels[order[r]] * discount(r);
  return dcg / idcg;
}

int accuracy_at_k(std::span<const CityIndex> ranked, CityIndex truth, std::size_t k) {
  const auto end = ranked.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranked.size()));
  return std::find(ranked.begin(), end, truth) != end ? 1 : 0;
}

std::vector<double> lambdarank_gradients(std::span<const double> scores,
                                         std::span<const double> labels,
                                         const LambdaConfig& config) {
  if (scores.size() != labels.size()) throw LengthMismatch(scores.size(), labels.size());
  if (scores.size() < 2) throw LengthMismatch(scores.size(), 2);

  const std::size_t n = scores.size();
  std::vector<double> lambdas(n, 0.0);
  const double idcg = ideal_dcg(labels, config.truncation);
  if (idcg <= 0.0) return lambdas;

  const auto order = rank_order(scores);
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;
  const auto disc = [&](std::size_t i) {
    return rank[i] < config.truncation ? discount(rank[i]) : 0.0;
  };

  const double min_label = *std::min_element(labels.begin(), labels.end());
  std::vector<std::int64_t> acc(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] <= min_label) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(labels[i] > labels[j])) continue;
      const double delta = std::abs((labels[i] - labels[j]) * (disc(i) - disc(j))) / idcg;
      if (delta == 0.0) continue;
      const double rho = config.sigma / (1.0 + std::exp(config.sigma * (scores[i] - scores[j])));
      const auto q = static_cast<std::int64_t>(std::llround(rho * delta * kLambdaGrid));
      acc[i] += q;
      acc[j] -= q;
    }
  }
  for (std::size_t i = 0; i < n; ++i) lambdas[i] = static_cast<double>(acc[i]) / kLambdaGrid;
  return lambdas;
}

double two_proportion_z_test(std::size_t successes_a, std::size_t successes_b, std::size_t n) {
  if (n == 0) throw EmptyInput("two_proportion_z_test: n must be positive");
  const double nn = static_cast<double>(n);
  const double pa = static_cast<double>(successes_a) / nn;
  const double pb = static_cast<double>(successes_b) / nn;
  const double pooled = (pa + pb) / 2.0;
  const double variance = pooled * (1.0 - pooled) * (2.0 / nn);
  if (variance <= 0.0) return 1.0;
  const double z = (pa - pb) / std::sqrt(variance);
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

}  // namespace triprank
