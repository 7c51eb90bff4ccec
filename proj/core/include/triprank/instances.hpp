#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "triprank/candidates.hpp"
#include "triprank/dataset.hpp"
#include "triprank/features.hpp"
#include "triprank/ltr.hpp"
#include "triprank/nn/model.hpp"

namespace triprank {

/// What a ranking instance is built from: fitted counting models, the
/// city -> country table and feature/candidate settings.
struct InstanceContext {
  const FittedStats* stats = nullptr;
  std::span<const CountryIndex> city_country;
  FeatureConfig features;
  CandidateConfig candidates;
  /// Longest prefix kept (most recent checkins).
  std::size_t max_prefix = kMaxTripLength;
};

/// One trip prefix with its candidate pool and every engineered input.
struct RankingInstance {
  std::vector<EncodedCheckin> prefix;
  EncodedCheckin target_context;
  CandidateSet candidates;
  std::vector<CountryIndex> candidate_country;
  std::vector<CandidateFeatures> candidate_features;
  std::vector<TripCityFeatures> trip_features;
  TripCityFeatures target_features{};
  /// Aligned with candidates; empty when unlabelled.
  std::vector<double> labels;

  bool has_relevant() const noexcept;
};

RankingInstance build_instance(std::span<const EncodedCheckin> prefix,
                               const EncodedCheckin& target_context, const InstanceContext& context);

void attach_labels(RankingInstance& instance, const LabeledInstance& labels);

/// Pads to the longest prefix / candidate list in the batch, or to the given
/// sizes when they are larger.
nn::ModelBatch make_batch(std::span<const RankingInstance* const> instances,
                          std::size_t pad_trip = 0, std::size_t pad_candidates = 0);
nn::ModelBatch make_batch(std::span<const RankingInstance> instances, std::size_t pad_trip = 0,
                          std::size_t pad_candidates = 0);

/// Candidate cities ordered by model score (descending, candidate order on ties).
std::vector<CityIndex> rank_candidates(const RankingInstance& instance,
                                       std::span<const double> scores);

}  // namespace triprank
