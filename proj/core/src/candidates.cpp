#include "triprank/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "triprank/error.hpp"

namespace triprank {

namespace {

const TransitionMatrix::Row kEmptyRow;
const RankedCounts kEmptyCounts;
const std::vector<std::pair<CityIndex, std::uint32_t>> kEmptyVector;

RankedCounts rank_counts(std::unordered_map<CityIndex, std::uint32_t> counts) {
  RankedCounts out;
  out.ranked.reserve(counts.size());
  for (const auto& [city, n] : counts) out.ranked.push_back(city);
  std::sort(out.ranked.begin(), out.ranked.end(), [&](CityIndex a, CityIndex b) {
    const auto na = counts.at(a), nb = counts.at(b);
    return na != nb ? na > nb : a < b;
  });
  out.counts = std::move(counts);
  return out;
}

template <class Key>
std::unordered_map<Key, RankedCounts> rank_all(
    std::unordered_map<Key, std::unordered_map<CityIndex, std::uint32_t>> raw) {
  std::unordered_map<Key, RankedCounts> out;
  for (auto& [key, counts] : raw) out.emplace(key, rank_counts(std::move(counts)));
  return out;
}

template <class Key>
const RankedCounts& lookup(const std::unordered_map<Key, RankedCounts>& table, Key key) noexcept {
  const auto it = table.find(key);
  return it == table.end() ? kEmptyCounts : it->second;
}

}  // namespace

// ---------------------------------------------------------------------------
// TransitionMatrix

std::uint32_t TransitionMatrix::at(CityIndex from, CityIndex to) const noexcept {
  const Row& r = row(from);
  const auto it = std::lower_bound(r.begin(), r.end(), to,
                                   [](const auto& entry, CityIndex c) { return entry.first < c; });
  return it != r.end() && it->first == to ? it->second : 0;
}

const TransitionMatrix::Row& TransitionMatrix::row(CityIndex from) const noexcept {
  if (from < 0 || static_cast<std::size_t>(from) >= rows_.size()) return kEmptyRow;
  return rows_[static_cast<std::size_t>(from)];
}

std::size_t TransitionMatrix::nonzeros() const noexcept {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

TransitionMatrix fit_transition_matrix(std::span<const EncodedTrip> trips) {
  std::vector<std::map<CityIndex, std::uint32_t>> dense;
  for (const auto& trip : trips) {
    if (trip.checkins.empty()) continue;
    const CityIndex last = trip.checkins.back().city;
    for (std::size_t i = 0; i + 1 < trip.checkins.size(); ++i) {
      const auto from = static_cast<std::size_t>(std::max(trip.checkins[i].city, 0));
      if (from >= dense.size()) dense.resize(from + 1);
      ++dense[from][last];
    }
  }
  TransitionMatrix t;
  t.rows_.resize(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i)
    t.rows_[i].assign(dense[i].begin(), dense[i].end());
  return t;
}

// ---------------------------------------------------------------------------
// SparseScores

double SparseScores::at(CityIndex city) const noexcept {
  const auto it = std::lower_bound(entries.begin(), entries.end(), city,
                                   [](const auto& e, CityIndex c) { return e.first < c; });
  return it != entries.end() && it->first == city ? it->second : 0.0;
}

double SparseScores::max() const noexcept {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.second);
  return m;
}

std::vector<CityIndex> SparseScores::ranked() const {
  auto sorted = entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<CityIndex> out;
  out.reserve(sorted.size());
  for (const auto& e : sorted) out.push_back(e.first);
  return out;
}

SparseScores transition_chain_scores(std::span<const EncodedCheckin> cities,
                                     const TransitionMatrix& transitions) {
  std::map<CityIndex, double> acc;
  for (const auto& c : cities)
    for (const auto& [to, n] : transitions.row(c.city)) acc[to] += n;
  SparseScores out;
  out.entries.reserve(acc.size());
  for (const auto& e : acc)
    if (e.second != 0.0) out.entries.push_back(e);
  return out;
}

// ---------------------------------------------------------------------------
// PopularityStats

std::uint32_t RankedCounts::count(CityIndex city) const noexcept {
  const auto it = counts.find(city);
  return it == counts.end() ? 0 : it->second;
}

const RankedCounts& PopularityStats::booker_country(CountryIndex booker) const noexcept {
  return lookup(booker_country_top, booker);
}

const RankedCounts& PopularityStats::last_city_country(CountryIndex hotel) const noexcept {
  return lookup(last_city_country_top, hotel);
}

const RankedCounts& PopularityStats::booker_trip_country(CountryIndex booker,
                                                         CountryIndex hotel) const noexcept {
  return lookup(booker_trip_country_top, pair_key(booker, hotel));
}

std::uint64_t PopularityStats::month_key(CityIndex city, unsigned month, int year) noexcept {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(city)) << 32) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(year)) << 4) | month;
}

std::uint32_t PopularityStats::month_year_count(CityIndex city, unsigned month,
                                                int year) const noexcept {
  const auto it = month_year_counts_.find(month_key(city, month, year));
  return it == month_year_counts_.end() ? 0 : it->second;
}

const std::vector<std::pair<CityIndex, std::uint32_t>>& PopularityStats::cooccurrence(
    CityIndex city) const noexcept {
  if (city < 0 || static_cast<std::size_t>(city) >= cooccurrence_.size()) return kEmptyVector;
  return cooccurrence_[static_cast<std::size_t>(city)];
}

std::uint32_t PopularityStats::cooccurrence(CityIndex a, CityIndex b) const noexcept {
  const auto& v = cooccurrence(a);
  const auto it = std::lower_bound(v.begin(), v.end(), b,
                                   [](const auto& e, CityIndex c) { return e.first < c; });
  return it != v.end() && it->first == b ? it->second : 0;
}

double PopularityStats::cooccurrence_norm(CityIndex city) const noexcept {
  if (city < 0 || static_cast<std::size_t>(city) >= cooccurrence_norm_.size()) return 0.0;
  return cooccurrence_norm_[static_cast<std::size_t>(city)];
}

PopularityStats fit_popularity_stats(std::span<const EncodedTrip> trips) {
  std::unordered_map<CityIndex, std::uint32_t> global;
  std::unordered_map<CountryIndex, std::unordered_map<CityIndex, std::uint32_t>> booker;
  std::unordered_map<CountryIndex, std::unordered_map<CityIndex, std::uint32_t>> last_country;
  std::unordered_map<std::uint64_t, std::unordered_map<CityIndex, std::uint32_t>> booker_trip;
  std::vector<std::map<CityIndex, std::uint32_t>> cooc;

  PopularityStats s;
  std::vector<CityIndex> distinct;
  for (const auto& trip : trips) {
    const auto& cs = trip.checkins;
    if (cs.empty()) continue;
    const CountryIndex trip_booker = cs.front().booker_country;
    for (const auto& c : cs) {
      ++global[c.city];
      ++booker[trip_booker][c.city];
      const CivilDate d = to_civil(c.checkin);
      ++s.month_year_counts_[PopularityStats::month_key(c.city, d.month, d.year)];
    }
    if (cs.size() >= 2) {
      const CityIndex last = cs.back().city;
      const CountryIndex hotel = cs[cs.size() - 2].hotel_country;
      ++last_country[hotel][last];
      ++booker_trip[PopularityStats::pair_key(trip_booker, hotel)][last];
    }

    distinct.clear();
    for (const auto& c : cs) distinct.push_back(c.city);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (!distinct.empty() && static_cast<std::size_t>(distinct.back()) >= cooc.size())
      cooc.resize(static_cast<std::size_t>(distinct.back()) + 1);
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      for (std::size_t j = i + 1; j < distinct.size(); ++j) {
        ++cooc[static_cast<std::size_t>(distinct[i])][distinct[j]];
        ++cooc[static_cast<std::size_t>(distinct[j])][distinct[i]];
      }
    }
  }

  s.global_top = rank_counts(std::move(global));
  s.booker_country_top = rank_all(std::move(booker));
  s.last_city_country_top = rank_all(std::move(last_country));
  s.booker_trip_country_top = rank_all(std::move(booker_trip));
  s.cooccurrence_.resize(cooc.size());
  s.cooccurrence_norm_.assign(cooc.size(), 0.0);
  for (std::size_t i = 0; i < cooc.size(); ++i) {
    s.cooccurrence_[i].assign(cooc[i].begin(), cooc[i].end());
    double sq = 0.0;
    for (const auto& [city, n] : cooc[i]) sq += static_cast<double>(n) * n;
    s.cooccurrence_norm_[i] = std::sqrt(sq);
  }
  return s;
}

FittedStats fit_stats(std::span<const EncodedTrip> trips) {
  return FittedStats{fit_transition_matrix(trips), fit_popularity_stats(trips)};
}

// ---------------------------------------------------------------------------
// Candidate assembly

std::string_view to_string(CandidateSource source) noexcept {
  switch (source) {
    case CandidateSource::TripCity: return "TripCity";
    case CandidateSource::TransitionChain: return "TransitionChain";
    case CandidateSource::BookerTripCountryTop: return "BookerTripCountryTop";
    case CandidateSource::LastCityCountryTop: return "LastCityCountryTop";
    case CandidateSource::BookerCountryTop: return "BookerCountryTop";
    case CandidateSource::GlobalTop: return "GlobalTop";
  }
  return "?";
}

bool CandidateSet::contains(CityIndex city) const noexcept { return position(city) >= 0; }

std::ptrdiff_t CandidateSet::position(CityIndex city) const noexcept {
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (candidates[i].city == city) return static_cast<std::ptrdiff_t>(i);
  return -1;
}

CandidateSet assemble_candidates(std::span<const EncodedCheckin> prefix, const FittedStats& stats,
                                 const CandidateConfig& config) {
  return assemble_candidates(prefix, transition_chain_scores(prefix, stats.transitions),
                             stats.popularity, config);
}

CandidateSet assemble_candidates(std::span<const EncodedCheckin> prefix, const SparseScores& chain,
                                 const PopularityStats& popularity,
                                 const CandidateConfig& config) {
  CandidateSet set;
  set.candidates.reserve(config.limit);
  std::unordered_set<CityIndex> seen;

  const auto fill = [&](const std::vector<CityIndex>& cities, std::size_t cap,
                        CandidateSource source) {
    cap = std::min(cap, config.limit);
    for (const CityIndex city : cities) {
      if (set.size() >= cap) return;
      if (city <= 0 || !seen.insert(city).second) continue;
      set.candidates.push_back({city, source});
    }
  };

  std::vector<CityIndex> trip_cities;
  trip_cities.reserve(prefix.size());
  for (const auto& c : prefix) trip_cities.push_back(c.city);
  fill(trip_cities, config.limit, CandidateSource::TripCity);

  if (prefix.empty()) {
    fill(popularity.global_top.ranked, config.limit, CandidateSource::GlobalTop);
    return set;
  }
  const CountryIndex booker = prefix.front().booker_country;
  const CountryIndex last_hotel = prefix.back().hotel_country;

  fill(chain.ranked(), config.transition_quota, CandidateSource::TransitionChain);
  fill(popularity.booker_trip_country(booker, last_hotel).ranked, config.booker_trip_quota,
       CandidateSource::BookerTripCountryTop);
  fill(popularity.last_city_country(last_hotel).ranked, config.limit,
       CandidateSource::LastCityCountryTop);
  fill(popularity.booker_country(booker).ranked, config.limit, CandidateSource::BookerCountryTop);
  fill(popularity.global_top.ranked, config.limit, CandidateSource::GlobalTop);
  return set;
}

double candidate_recall(std::span<const EncodedTrip> trips, const CandidateBuilder& builder) {
  if (trips.empty()) throw EmptyInput("candidate_recall: no trips");
  std::size_t hits = 0;
  for (const auto& trip : trips) {
    if (trip.size() < 2) throw TripTooShort("candidate_recall: trip " + trip.utrip_id);
    const auto prefix = std::span(trip.checkins).first(trip.size() - 1);
    if (builder(prefix).contains(trip.checkins.back().city)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trips.size());
}

void write_candidates_csv(std::ostream& out, const CandidateSet& set, const Vocab& cities) {
  out << "city_id,source_tag,rank\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& c = set.candidates[i];
    out << cities.value_of(c.city) << ',' << to_string(c.source) << ',' << i + 1 << '\n';
  }
}

}  // namespace triprank
