#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "triprank/dataset.hpp"

namespace triprank {

/// Sparse city-to-final-city counts filled by walking each trip's prefix
/// cities against its last city.
class TransitionMatrix {
 public:
  using Row = std::vector<std::pair<CityIndex, std::uint32_t>>;  // sorted by column

  std::uint32_t at(CityIndex from, CityIndex to) const noexcept;
  /// Empty row for unseen cities.
  const Row& row(CityIndex from) const noexcept;
  std::size_t row_count() const noexcept { return rows_.size(); }
  std::size_t nonzeros() const noexcept;

  friend TransitionMatrix fit_transition_matrix(std::span<const EncodedTrip> trips);

 private:
  std::vector<Row> rows_;
};

TransitionMatrix fit_transition_matrix(std::span<const EncodedTrip> trips);

/// Sparse non-negative scores over cities.
struct SparseScores {
  std::vector<std::pair<CityIndex, double>> entries;  // sorted by city, zero entries omitted

  double at(CityIndex city) const noexcept;
  double max() const noexcept;
  /// Cities by descending score, ascending index on ties.
  std::vector<CityIndex> ranked() const;
};

/// Sum of the transition rows of every city in `cities`, with multiplicity.
SparseScores transition_chain_scores(std::span<const EncodedCheckin> cities,
                                     const TransitionMatrix& transitions);

/// Counts keyed by city, ranked by count descending then city ascending.
struct RankedCounts {
  std::vector<CityIndex> ranked;
  std::unordered_map<CityIndex, std::uint32_t> counts;

  std::uint32_t count(CityIndex city) const noexcept;
};

class PopularityStats {
 public:
  RankedCounts global_top;
  std::unordered_map<CountryIndex, RankedCounts> booker_country_top;
  std::unordered_map<CountryIndex, RankedCounts> last_city_country_top;
  std::unordered_map<std::uint64_t, RankedCounts> booker_trip_country_top;

  const RankedCounts& booker_country(CountryIndex booker) const noexcept;
  const RankedCounts& last_city_country(CountryIndex hotel) const noexcept;
  const RankedCounts& booker_trip_country(CountryIndex booker, CountryIndex hotel) const noexcept;

  std::uint32_t month_year_count(CityIndex city, unsigned month, int year) const noexcept;

  /// Co-occurrence count vector of `city`, sorted by partner city. Empty when unseen.
  const std::vector<std::pair<CityIndex, std::uint32_t>>& cooccurrence(CityIndex city) const noexcept;
  std::uint32_t cooccurrence(CityIndex a, CityIndex b) const noexcept;
  double cooccurrence_norm(CityIndex city) const noexcept;

  static std::uint64_t pair_key(CountryIndex booker, CountryIndex hotel) noexcept {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(booker)) << 32) |
           static_cast<std::uint32_t>(hotel);
  }
  static std::uint64_t month_key(CityIndex city, unsigned month, int year) noexcept;

  friend PopularityStats fit_popularity_stats(std::span<const EncodedTrip> trips);

 private:
  std::unordered_map<std::uint64_t, std::uint32_t> month_year_counts_;
  std::vector<std::vector<std::pair<CityIndex, std::uint32_t>>> cooccurrence_;
  std::vector<double> cooccurrence_norm_;
};

PopularityStats fit_popularity_stats(std::span<const EncodedTrip> trips);

/// Counting models fitted on one set of trips.
struct FittedStats {
  TransitionMatrix transitions;
  PopularityStats popularity;
};

FittedStats fit_stats(std::span<const EncodedTrip> trips);

enum class CandidateSource : std::uint8_t {
  TripCity,
  TransitionChain,
  BookerTripCountryTop,
  LastCityCountryTop,
  BookerCountryTop,
  GlobalTop,
};

std::string_view to_string(CandidateSource source) noexcept;

struct Candidate {
  CityIndex city;
  CandidateSource source;
};

struct CandidateSet {
  std::vector<Candidate> candidates;

  std::size_t size() const noexcept { return candidates.size(); }
  bool contains(CityIndex city) const noexcept;
  /// Position of `city` or -1.
  std::ptrdiff_t position(CityIndex city) const noexcept;
};

/// Cumulative size each stage of the cascade may fill up to.
struct CandidateConfig {
  std::size_t transition_quota = 150;
  std::size_t booker_trip_quota = 350;
  std::size_t limit = 500;
};

/// Fills trip cities, then TransitionChain up to 150, BookerTripCountryTop up to
/// 350, LastCityCountryTop, BookerCountryTop and GlobalTop up to the limit.
/// Duplicates are skipped; the result is short when every source is exhausted.
CandidateSet assemble_candidates(std::span<const EncodedCheckin> prefix, const FittedStats& stats,
                                 const CandidateConfig& config = {});

/// Same cascade reusing precomputed transition scores for the prefix.
CandidateSet assemble_candidates(std::span<const EncodedCheckin> prefix, const SparseScores& chain,
                                 const PopularityStats& popularity,
                                 const CandidateConfig& config = {});

using CandidateBuilder = std::function<CandidateSet(std::span<const EncodedCheckin> prefix)>;

/// Fraction of trips whose last city is among the candidates built from the
/// rest of the trip. Throws EmptyInput on an empty trip list and TripTooShort
/// for single-checkin trips.
double candidate_recall(std::span<const EncodedTrip> trips, const CandidateBuilder& builder);

/// Debug dump: city_id,source_tag,rank (rank starting at 1).
void write_candidates_csv(std::ostream& out, const CandidateSet& set, const Vocab& cities);

}  // namespace triprank
