#include "triprank/instances.hpp"

#include <algorithm>

#include "triprank/error.hpp"

namespace triprank {

bool RankingInstance::has_relevant() const noexcept {
  return std::any_of(labels.begin(), labels.end(), [](double l) { return l > 0.0; });
}

RankingInstance build_instance(std::span<const EncodedCheckin> prefix,
                               const EncodedCheckin& target_context,
                               const InstanceContext& context) {
  if (prefix.size() > context.max_prefix) prefix = prefix.last(context.max_prefix);

  RankingInstance inst;
  inst.prefix.assign(prefix.begin(), prefix.end());
  inst.target_context = target_context;

  const SparseScores chain = transition_chain_scores(prefix, context.stats->transitions);
  inst.candidates = assemble_candidates(prefix, chain, context.stats->popularity, context.candidates);

  const CivilDate target_date = to_civil(target_context.checkin);
  const CandidateContext cand_ctx{prefix, &chain, &context.stats->popularity, target_date.month,
                                  target_date.year};
  inst.candidate_features = candidate_features(inst.candidates, cand_ctx);
  inst.candidate_country.reserve(inst.candidates.size());
  for (const auto& c : inst.candidates.candidates) {
    const auto city = static_cast<std::size_t>(c.city);
    inst.candidate_country.push_back(city < context.city_country.size() ? context.city_country[city]
                                                                        : 0);
  }

  inst.trip_features.reserve(prefix.size());
  for (std::size_t i = 0; i < prefix.size(); ++i)
    inst.trip_features.push_back(
        trip_city_features(prefix[i], i > 0 ? &prefix[i - 1] : nullptr, context.features));
  inst.target_features = target_context_features(target_context, context.features);
  return inst;
}

void attach_labels(RankingInstance& instance, const LabeledInstance& labels) {
  instance.labels.resize(instance.candidates.size());
  for (std::size_t i = 0; i < instance.candidates.size(); ++i)
    instance.labels[i] = labels.label_of(instance.candidates.candidates[i].city);
}

nn::ModelBatch make_batch(std::span<const RankingInstance* const> instances, std::size_t pad_trip,
                          std::size_t pad_candidates) {
  std::size_t trip_len = pad_trip;
  std::size_t n_cand = pad_candidates;
  for (const auto* inst : instances) {
    trip_len = std::max(trip_len, inst->prefix.size());
    n_cand = std::max(n_cand, inst->candidates.size());
  }
  trip_len = std::max<std::size_t>(trip_len, 1);
  n_cand = std::max<std::size_t>(n_cand, 1);

  auto batch = nn::ModelBatch::zeros(instances.size(), trip_len, n_cand);
  for (std::size_t b = 0; b < instances.size(); ++b) {
    const RankingInstance& inst = *instances[b];
    for (std::size_t p = 0; p < inst.prefix.size(); ++p) {
      const std::size_t slot = b * trip_len + p;
      const auto& c = inst.prefix[p];
      batch.trip_city[slot] = c.city;
      batch.trip_booker_country[slot] = c.booker_country;
      batch.trip_hotel_country[slot] = c.hotel_country;
      batch.trip_affiliate[slot] = c.affiliate;
      std::copy(inst.trip_features[p].begin(), inst.trip_features[p].end(),
                batch.trip_features.data() + slot * kTripCityFeatureCount);
      batch.trip_mask.values[slot] = 1.0;
    }
    for (std::size_t j = 0; j < inst.candidates.size(); ++j) {
      const std::size_t slot = b * n_cand + j;
      batch.candidate_city[slot] = inst.candidates.candidates[j].city;
      batch.candidate_country[slot] = inst.candidate_country[j];
      std::copy(inst.candidate_features[j].begin(), inst.candidate_features[j].end(),
                batch.candidate_features.data() + slot * kCandidateFeatureCount);
      batch.candidate_mask.values[slot] = 1.0;
    }
    std::copy(inst.target_features.begin(), inst.target_features.end(),
              batch.target_features.data() + b * kTripCityFeatureCount);
  }
  return batch;
}

nn::ModelBatch make_batch(std::span<const RankingInstance> instances, std::size_t pad_trip,
                          std::size_t pad_candidates) {
  std::vector<const RankingInstance*> ptrs;
  ptrs.reserve(instances.size());
  for (const auto& i : instances) ptrs.push_back(&i);
  return make_batch(std::span<const RankingInstance* const>(ptrs), pad_trip, pad_candidates);
}

std::vector<CityIndex> rank_candidates(const RankingInstance& instance,
                                       std::span<const double> scores) {
  if (scores.size() != instance.candidates.size())
    throw LengthMismatch(scores.size(), instance.candidates.size());
  std::vector<CityIndex> ranked;
  ranked.reserve(scores.size());
  for (const auto i : rank_order(scores)) ranked.push_back(instance.candidates.candidates[i].city);
  return ranked;
}

}  // namespace triprank
