#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "triprank/candidates.hpp"
#include "triprank/error.hpp"
#include "triprank/random.hpp"

using namespace triprank;

namespace {

constexpr CityIndex A = 1, B = 2, C = 3, D = 4;

EncodedTrip trip_of(std::initializer_list<CityIndex> cities, CountryIndex booker = 1,
                    std::initializer_list<CountryIndex> hotels = {}) {
  EncodedTrip t;
  t.utrip_id = "t";
  auto h = hotels.begin();
  std::int32_t day = 0;
  for (const CityIndex c : cities) {
    EncodedCheckin e;
    e.city = c;
    e.booker_country = booker;
    e.hotel_country = h != hotels.end() ? *h++ : 1;
    e.affiliate = 1;
    e.checkin = Date{day};
    e.checkout = Date{day + 1};
    ++day;
    t.checkins.push_back(e);
  }
  return t;
}

}  // namespace

TEST(TransitionMatrix, HandTracedExamples) {
  const std::vector<EncodedTrip> trips = {trip_of({A, B, C}), trip_of({A, C})};
  const auto T = fit_transition_matrix(trips);
  EXPECT_EQ(T.at(A, C), 2u);
  EXPECT_EQ(T.at(B, C), 1u);
  EXPECT_EQ(T.nonzeros(), 2u);
  EXPECT_EQ(T.at(C, C), 0u);
  EXPECT_EQ(T.at(A, B), 0u);

  const auto chain = transition_chain_scores(trip_of({A, B}).checkins, T);
  EXPECT_EQ(chain.at(C), 3.0);
  EXPECT_EQ(chain.ranked().front(), C);
}

TEST(TransitionMatrix, SingleCityTripAndRepeats) {
  const std::vector<EncodedTrip> single = {trip_of({A})};
  EXPECT_EQ(fit_transition_matrix(single).nonzeros(), 0u);
  const std::vector<EncodedTrip> repeat = {trip_of({A, A, B})};
  EXPECT_EQ(fit_transition_matrix(repeat).at(A, B), 2u);
}

TEST(TransitionMatrix, ChainScoresMultiplicityAndUnknownCities) {
  const std::vector<EncodedTrip> trips = {trip_of({A, B, C}), trip_of({A, D})};
  const auto T = fit_transition_matrix(trips);
  const auto once = transition_chain_scores(trip_of({A}).checkins, T);
  const auto twice = transition_chain_scores(trip_of({A, A}).checkins, T);
  for (const CityIndex city : {A, B, C, D}) EXPECT_EQ(twice.at(city), 2.0 * once.at(city));
  EXPECT_TRUE(transition_chain_scores(trip_of({42, 43}).checkins, T).entries.empty());
}

TEST(TransitionMatrix, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto corpus = oracle::make_corpus(150, seed, 0.6, 40);
    const auto T = fit_transition_matrix(corpus.encoded);
    const auto oracle = oracle::brute_transition_counts(corpus.encoded);
    std::size_t nonzero = 0;
    for (const auto& [key, n] : oracle) {
      ASSERT_EQ(T.at(key.first, key.second), static_cast<std::uint32_t>(n));
      ++nonzero;
    }
    EXPECT_EQ(T.nonzeros(), nonzero);

    for (std::size_t i = 0; i < 20; ++i) {
      const auto& prefix = corpus.encoded[i].checkins;
      const auto scores = transition_chain_scores(prefix, T);
      const auto expected = oracle::brute_chain_scores(prefix, oracle);
      ASSERT_EQ(scores.entries.size(), expected.size());
      for (const auto& [city, s] : expected) EXPECT_EQ(scores.at(city), static_cast<double>(s));
    }
  }
}

TEST(TransitionMatrix, ChainScoresAreLinearInConcatenation) {
  const auto corpus = oracle::make_corpus(200, 3);
  const auto T = fit_transition_matrix(corpus.encoded);
  const auto& p = corpus.encoded[0].checkins;
  const auto& q = corpus.encoded[1].checkins;
  std::vector<EncodedCheckin> joined(p.begin(), p.end());
  joined.insert(joined.end(), q.begin(), q.end());
  const auto sp = transition_chain_scores(p, T);
  const auto sq = transition_chain_scores(q, T);
  const auto sj = transition_chain_scores(joined, T);
  for (CityIndex city = 1; city <= 64; ++city) EXPECT_EQ(sj.at(city), sp.at(city) + sq.at(city));
}

TEST(SparseScores, RankedTieBreaksByCityIndex) {
  SparseScores s;
  s.entries = {{2, 1.0}, {5, 3.0}, {7, 1.0}, {9, 3.0}};
  EXPECT_EQ(s.ranked(), (std::vector<CityIndex>{5, 9, 2, 7}));
  EXPECT_EQ(s.max(), 3.0);
  EXPECT_EQ(s.at(3), 0.0);
}

TEST(PopularityStats, CountsAndKeys) {
  // Trip 1 booker 1: A(h1) B(h2) C(h3); trip 2 booker 2: A(h1) A(h2) B(h1).
  const std::vector<EncodedTrip> trips = {trip_of({A, B, C}, 1, {1, 2, 3}),
                                          trip_of({A, A, B}, 2, {1, 2, 1})};
  const auto stats = fit_popularity_stats(trips);
  EXPECT_EQ(stats.global_top.ranked, (std::vector<CityIndex>{A, B, C}));
  EXPECT_EQ(stats.global_top.count(A), 3u);
  EXPECT_EQ(stats.global_top.count(B), 2u);
  EXPECT_EQ(stats.booker_country(2).count(A), 2u);
  EXPECT_EQ(stats.booker_country(1).count(C), 1u);
  // Last city keyed by the penultimate checkin's hotel country (2 for both trips).
  EXPECT_EQ(stats.last_city_country(2).count(C), 1u);
  EXPECT_EQ(stats.last_city_country(2).count(B), 1u);
  EXPECT_EQ(stats.last_city_country(3).ranked.size(), 0u);
  EXPECT_EQ(stats.booker_trip_country(1, 2).count(C), 1u);
  EXPECT_EQ(stats.booker_trip_country(2, 2).count(B), 1u);
  EXPECT_EQ(stats.booker_trip_country(2, 1).ranked.size(), 0u);
  // Co-occurrence: once per trip per unordered pair, symmetric, zero diagonal.
  EXPECT_EQ(stats.cooccurrence(A, B), 2u);
  EXPECT_EQ(stats.cooccurrence(B, A), 2u);
  EXPECT_EQ(stats.cooccurrence(A, C), 1u);
  EXPECT_EQ(stats.cooccurrence(A, A), 0u);
}

TEST(PopularityStats, BookerCountryTopFindsDominantEnding) {
  std::vector<EncodedTrip> trips;
  for (int i = 0; i < 5; ++i) trips.push_back(trip_of({A, D}, 7));
  trips.push_back(trip_of({B, C}, 8));
  const auto stats = fit_popularity_stats(trips);
  const auto& top = stats.booker_country(7).ranked;
  ASSERT_FALSE(top.empty());
  EXPECT_NE(std::find(top.begin(), top.end(), D), top.end());
  EXPECT_EQ(stats.booker_country(7).count(D), 5u);
}

TEST(PopularityStats, RankedListsSortedAndCooccurrenceSymmetric) {
  const auto corpus = oracle::make_corpus(400, 12, 0.5);
  const auto stats = fit_popularity_stats(corpus.encoded);
  const auto check_sorted = [](const RankedCounts& rc) {
    for (std::size_t i = 1; i < rc.ranked.size(); ++i) {
      const auto a = rc.count(rc.ranked[i - 1]), b = rc.count(rc.ranked[i]);
      ASSERT_TRUE(a > b || (a == b && rc.ranked[i - 1] < rc.ranked[i]));
    }
  };
  check_sorted(stats.global_top);
  for (const auto& [k, rc] : stats.booker_country_top) check_sorted(rc);
  for (const auto& [k, rc] : stats.last_city_country_top) check_sorted(rc);
  for (const auto& [k, rc] : stats.booker_trip_country_top) check_sorted(rc);
  for (CityIndex a = 1; a <= 64; ++a) {
    EXPECT_EQ(stats.cooccurrence(a, a), 0u);
    for (CityIndex b = 1; b <= 64; ++b) ASSERT_EQ(stats.cooccurrence(a, b), stats.cooccurrence(b, a));
  }
  std::uint32_t month_total = 0;
  for (CityIndex c = 1; c <= 64; ++c)
    for (int year = 2016; year <= 2019; ++year)
      for (unsigned m = 1; m <= 12; ++m) month_total += stats.month_year_count(c, m, year);
  std::size_t checkins = 0;
  for (const auto& t : corpus.encoded) checkins += t.size();
  EXPECT_EQ(month_total, checkins);
}

TEST(Candidates, TripCitiesFirstThenFullSet) {
  const auto corpus = oracle::make_corpus(3000, 4, 0.3, 900);
  const auto stats = fit_stats(corpus.encoded);
  const auto query = trip_of({5, 6, 7}, corpus.encoded[0].checkins[0].booker_country, {1, 1, 1});
  const auto set = assemble_candidates(query.checkins, stats);
  ASSERT_EQ(set.size(), 500u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(set.candidates[i].city, query.checkins[i].city);
    EXPECT_EQ(set.candidates[i].source, CandidateSource::TripCity);
  }
}

TEST(Candidates, EmptyStatsGiveTripCitiesOnly) {
  const auto stats = fit_stats(std::span<const EncodedTrip>{});
  const auto set = assemble_candidates(trip_of({A, B, A}).checkins, stats);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.candidates[0].city, A);
  EXPECT_EQ(set.candidates[1].city, B);
}

TEST(Candidates, GlobalTopFillsWhenOtherModelsAreEmpty) {
  PopularityStats pop;
  for (CityIndex c = 1; c <= 600; ++c) {
    pop.global_top.ranked.push_back(c);
    pop.global_top.counts[c] = 1;
  }
  const auto set = assemble_candidates(trip_of({1000, 1001}).checkins, SparseScores{}, pop);
  ASSERT_EQ(set.size(), 500u);
  for (std::size_t i = 2; i < set.size(); ++i)
    EXPECT_EQ(set.candidates[i].source, CandidateSource::GlobalTop);
}

TEST(Candidates, InvariantsOnRandomTrips) {
  const auto fit_corpus = oracle::make_corpus(3000, 21, 0.3, 900);
  const auto stats = fit_stats(fit_corpus.encoded);
  const auto queries = oracle::make_corpus(1000, 22, 0.3, 900);
  const CandidateConfig config;
  for (const auto& trip : queries.encoded) {
    // Query cities are re-encoded against the fitting vocabulary.
    std::vector<EncodedCheckin> prefix;
    for (const auto& c : queries.trips[&trip - queries.encoded.data()].checkins)
      prefix.push_back(encode(c, fit_corpus.vocabs));
    prefix.pop_back();

    const auto set = assemble_candidates(prefix, stats, config);
    ASSERT_LE(set.size(), config.limit);
    std::set<CityIndex> seen;
    int last_stage = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto& cand = set.candidates[i];
      ASSERT_TRUE(seen.insert(cand.city).second) << "duplicate city " << cand.city;
      const int stage = static_cast<int>(cand.source);
      ASSERT_GE(stage, last_stage) << "stages out of order";
      last_stage = stage;
      if (cand.source == CandidateSource::TransitionChain) {
        ASSERT_LT(i, config.transition_quota);
      }
      if (cand.source == CandidateSource::BookerTripCountryTop) {
        ASSERT_LT(i, config.booker_trip_quota);
      }
    }
    for (const auto& c : prefix)
      if (c.city > 0) {
        ASSERT_TRUE(set.contains(c.city));
      }
    // Deterministic for identical inputs.
    const auto again = assemble_candidates(prefix, stats, config);
    ASSERT_EQ(again.size(), set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
      ASSERT_EQ(again.candidates[i].city, set.candidates[i].city);
  }
}

TEST(Candidates, RecallIsOneOnDeterministicSuccessors) {
  const auto corpus = oracle::make_corpus(2000, 31, 1.0);
  const auto split = split_dataset(corpus.trips, 300, 1, 5);
  const auto train = encode(split.train, corpus.vocabs);
  const auto val = encode(split.validation, corpus.vocabs);
  const auto stats = fit_stats(train);
  const double recall = candidate_recall(
      val, [&](std::span<const EncodedCheckin> prefix) { return assemble_candidates(prefix, stats); });
  EXPECT_EQ(recall, 1.0);
}

TEST(Candidates, RecallBoundaryBuilders) {
  const auto corpus = oracle::make_corpus(50, 2);
  EXPECT_EQ(candidate_recall(corpus.encoded, [](auto) { return CandidateSet{}; }), 0.0);
  EXPECT_EQ(candidate_recall(corpus.encoded,
                             [&](auto) {
                               CandidateSet all;
                               for (CityIndex c = 1; c <= 64; ++c)
                                 all.candidates.push_back({c, CandidateSource::GlobalTop});
                               return all;
                             }),
            1.0);
  EXPECT_THROW(candidate_recall({}, [](auto) { return CandidateSet{}; }), EmptyInput);
  const std::vector<EncodedTrip> short_trip = {trip_of({A})};
  EXPECT_THROW(candidate_recall(short_trip, [](auto) { return CandidateSet{}; }), TripTooShort);
}

TEST(Candidates, CsvDump) {
  Vocab cities;
  cities.add("100");
  cities.add("200");
  CandidateSet set;
  set.candidates = {{2, CandidateSource::TripCity}, {1, CandidateSource::GlobalTop}};
  std::ostringstream out;
  write_candidates_csv(out, set, cities);
  EXPECT_EQ(out.str(), "city_id,source_tag,rank\n200,TripCity,1\n100,GlobalTop,2\n");
}
