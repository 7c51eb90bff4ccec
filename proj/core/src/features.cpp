#include "triprank/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "triprank/hash.hpp"

namespace triprank {

namespace {

void fill_date_features(TripCityFeatures& f, const EncodedCheckin& c, const FeatureConfig& config) {
  const CivilDate in = to_civil(c.checkin);
  const CivilDate out = to_civil(c.checkout);

  const int nights = std::clamp(c.checkout.days - c.checkin.days, 0, config.max_nights);
  f[trip_feat::kNights] = static_cast<double>(nights) / config.max_nights;

  // Stay interval [checkin, checkout) touches a Saturday or Sunday.
  bool weekend = false;
  for (std::int32_t d = 0; d < c.checkout.days - c.checkin.days && d < 7; ++d) {
    const unsigned dow = (in.day_of_week + static_cast<unsigned>(d)) % 7;
    if (dow >= 5) weekend = true;
  }
  f[trip_feat::kWeekend] = weekend ? 1.0 : 0.0;

  f[trip_feat::kCheckinWeekday] = in.day_of_week / 7.0;
  f[trip_feat::kCheckoutWeekday] = out.day_of_week / 7.0;
  f[trip_feat::kCheckinDayOfYear] = in.day_of_year / 366.0;
  f[trip_feat::kCheckoutDayOfYear] = out.day_of_year / 366.0;

  const int year_slot = in.year - config.first_year;
  if (year_slot >= 0 && year_slot < 3) f[trip_feat::kYear + static_cast<std::size_t>(year_slot)] = 1.0;
  f[trip_feat::kMonth + in.month - 1] = 1.0;
}

double log_count(double count) { return std::log1p(count); }

}  // namespace

FeatureConfig fit_feature_config(std::span<const EncodedTrip> trips) {
  FeatureConfig config;
  bool any = false;
  for (const auto& t : trips) {
    for (const auto& c : t.checkins) {
      const int y = to_civil(c.checkin).year;
      config.first_year = any ? std::min(config.first_year, y) : y;
      any = true;
    }
  }
  return config;
}

TripCityFeatures trip_city_features(const EncodedCheckin& checkin, const EncodedCheckin* previous,
                                    const FeatureConfig& config) {
  TripCityFeatures f{};
  fill_date_features(f, checkin, config);
  f[trip_feat::kSameCountryAsPrevious] =
      previous != nullptr && previous->hotel_country == checkin.hotel_country ? 1.0 : 0.0;
  f[trip_feat::kBookerIsHotelCountry] = checkin.booker_country == checkin.hotel_country ? 1.0 : 0.0;
  return f;
}

TripCityFeatures target_context_features(const EncodedCheckin& last_checkin,
                                         const FeatureConfig& config) {
  TripCityFeatures f{};
  fill_date_features(f, last_checkin, config);
  return f;
}

double cosine_cooccurrence(CityIndex a, CityIndex b, const PopularityStats& stats) {
  const double na = stats.cooccurrence_norm(a);
  const double nb = stats.cooccurrence_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  const auto& va = stats.cooccurrence(a);
  const auto& vb = stats.cooccurrence(b);
  double dot = 0.0;
  auto ia = va.begin();
  auto ib = vb.begin();
  while (ia != va.end() && ib != vb.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += static_cast<double>(ia->second) * ib->second;
      ++ia;
      ++ib;
    }
  }
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

std::vector<CityIndex> recent_distinct_cities(std::span<const EncodedCheckin> prefix,
                                              std::size_t count) {
  std::vector<CityIndex> out;
  for (auto it = prefix.rbegin(); it != prefix.rend() && out.size() < count; ++it)
    if (std::find(out.begin(), out.end(), it->city) == out.end()) out.push_back(it->city);
  return out;
}

CandidateFeatures raw_candidate_features(CityIndex candidate, const CandidateContext& ctx) {
  CandidateFeatures f{};
  const PopularityStats& pop = *ctx.popularity;
  const CountryIndex booker = ctx.prefix.empty() ? 0 : ctx.prefix.front().booker_country;

  f[cand_feat::kGlobalPopularity] = log_count(pop.global_top.count(candidate));
  f[cand_feat::kBookerCountryPopularity] = log_count(pop.booker_country(booker).count(candidate));
  f[cand_feat::kMonthYearPopularity] =
      log_count(pop.month_year_count(candidate, ctx.target_month, ctx.target_year));
  f[cand_feat::kTransitionScore] = ctx.chain != nullptr ? log_count(ctx.chain->at(candidate)) : 0.0;
  f[cand_feat::kIsFirstTripCity] =
      !ctx.prefix.empty() && ctx.prefix.front().city == candidate ? 1.0 : 0.0;

  const auto recent = recent_distinct_cities(ctx.prefix);
  for (std::size_t k = 0; k < recent.size(); ++k) {
    f[cand_feat::kEqualsLast + k] = recent[k] == candidate ? 1.0 : 0.0;
    f[cand_feat::kCosineLast + k] = cosine_cooccurrence(candidate, recent[k], pop);
  }
  return f;
}

std::vector<CandidateFeatures> candidate_features(const CandidateSet& set,
                                                  const CandidateContext& ctx) {
  std::vector<CandidateFeatures> rows;
  rows.reserve(set.size());
  for (const auto& c : set.candidates) rows.push_back(raw_candidate_features(c.city, ctx));

  for (const std::size_t col : {cand_feat::kGlobalPopularity, cand_feat::kBookerCountryPopularity,
                                cand_feat::kMonthYearPopularity, cand_feat::kTransitionScore}) {
    double max = 0.0;
    for (const auto& r : rows) max = std::max(max, r[col]);
    if (max <= 0.0) continue;
    for (auto& r : rows) r[col] /= max;
  }
  return rows;
}

std::string feature_schema_text() {
  std::ostringstream out;
  out << "# group,index,name,range\n";
  const auto line = [&](const char* group, std::size_t index, const std::string& name,
                        const char* range) {
    out << group << ',' << index << ',' << name << ',' << range << '\n';
  };
  line("candidate", 0, "global_popularity", "[0,1]");
  line("candidate", 1, "booker_country_popularity", "[0,1]");
  line("candidate", 2, "month_year_popularity", "[0,1]");
  line("candidate", 3, "transition_chain_score", "[0,1]");
  line("candidate", 4, "is_first_trip_city", "{0,1}");
  for (std::size_t k = 1; k <= 5; ++k)
    line("candidate", 4 + k, "equals_last_" + std::to_string(k), "{0,1}");
  for (std::size_t k = 1; k <= 5; ++k)
    line("candidate", 9 + k, "cosine_last_" + std::to_string(k), "[0,1]");

  for (const char* group : {"trip_city", "target_context"}) {
    line(group, 0, "nights_clipped_30", "[0,1]");
    line(group, 1, "weekend", "{0,1}");
    line(group, 2, "same_country_as_previous", "{0,1}");
    line(group, 3, "checkin_weekday", "[0,1)");
    line(group, 4, "checkout_weekday", "[0,1)");
    line(group, 5, "checkin_day_of_year", "(0,1]");
    line(group, 6, "checkout_day_of_year", "(0,1]");
    line(group, 7, "booker_is_hotel_country", "{0,1}");
    for (std::size_t y = 0; y < 3; ++y) line(group, 8 + y, "year_" + std::to_string(y), "{0,1}");
    for (std::size_t m = 0; m < 12; ++m)
      line(group, 11 + m, "month_" + std::to_string(m + 1), "{0,1}");
  }
  return out.str();
}

std::uint64_t feature_schema_hash() { return fnv1a64(feature_schema_text()); }

}  // namespace triprank
