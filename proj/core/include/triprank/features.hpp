#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "triprank/candidates.hpp"
#include "triprank/dataset.hpp"

namespace triprank {

inline constexpr std::size_t kCandidateFeatureCount = 15;
inline constexpr std::size_t kTripCityFeatureCount = 23;
inline constexpr std::size_t kRecentCities = 5;

using CandidateFeatures = std::array<double, kCandidateFeatureCount>;
using TripCityFeatures = std::array<double, kTripCityFeatureCount>;

/// Candidate feature slots.
namespace cand_feat {
inline constexpr std::size_t kGlobalPopularity = 0;
inline constexpr std::size_t kBookerCountryPopularity = 1;
inline constexpr std::size_t kMonthYearPopularity = 2;
inline constexpr std::size_t kTransitionScore = 3;
inline constexpr std::size_t kIsFirstTripCity = 4;
inline constexpr std::size_t kEqualsLast = 5;   // 5 slots, k = 1..5
inline constexpr std::size_t kCosineLast = 10;  // 5 slots, k = 1..5
}  // namespace cand_feat

/// Trip-city feature slots.
namespace trip_feat {
inline constexpr std::size_t kNights = 0;
inline constexpr std::size_t kWeekend = 1;
inline constexpr std::size_t kSameCountryAsPrevious = 2;
inline constexpr std::size_t kCheckinWeekday = 3;
inline constexpr std::size_t kCheckoutWeekday = 4;
inline constexpr std::size_t kCheckinDayOfYear = 5;
inline constexpr std::size_t kCheckoutDayOfYear = 6;
inline constexpr std::size_t kBookerIsHotelCountry = 7;
inline constexpr std::size_t kYear = 8;    // 3 slots
inline constexpr std::size_t kMonth = 11;  // 12 slots
}  // namespace trip_feat

struct FeatureConfig {
  /// First of the three calendar years in the year one-hot.
  int first_year = 2016;
  int max_nights = 30;
};

/// first_year = earliest checkin year in `trips` (2016 when empty).
FeatureConfig fit_feature_config(std::span<const EncodedTrip> trips);

TripCityFeatures trip_city_features(const EncodedCheckin& checkin, const EncodedCheckin* previous,
                                    const FeatureConfig& config);

/// Date-derived entries of trip_city_features; hotel-country flags are 0.
TripCityFeatures target_context_features(const EncodedCheckin& last_checkin,
                                         const FeatureConfig& config);

double cosine_cooccurrence(CityIndex a, CityIndex b, const PopularityStats& stats);

/// Up to five most recent distinct cities of the prefix, most recent first.
std::vector<CityIndex> recent_distinct_cities(std::span<const EncodedCheckin> prefix,
                                              std::size_t count = kRecentCities);

/// Context shared by every candidate of one ranking instance.
struct CandidateContext {
  std::span<const EncodedCheckin> prefix;
  const SparseScores* chain = nullptr;
  const PopularityStats* popularity = nullptr;
  unsigned target_month = 1;
  int target_year = 2016;
};

/// Features of one candidate before per-instance max normalization: counts
/// and the transition score are log(1 + x) scaled, flags and cosines exact.
CandidateFeatures raw_candidate_features(CityIndex candidate, const CandidateContext& context);

/// Features for every candidate of the set, with the four count-based
/// columns divided by their maximum over the set (left at 0 when the max is 0).
std::vector<CandidateFeatures> candidate_features(const CandidateSet& set,
                                                  const CandidateContext& context);

/// Human-readable feature layout: `group,index,name,range` per line.
std::string feature_schema_text();
std::uint64_t feature_schema_hash();

}  // namespace triprank
