#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace triprank {

/// Calendar date stored as days since 1970-01-01.
struct Date {
  std::int32_t days = 0;

  friend constexpr auto operator<=>(Date, Date) = default;
};

/// Parses strict ISO `YYYY-MM-DD`; returns false on any malformed or impossible date.
bool parse_iso_date(std::string_view text, Date& out) noexcept;
std::string format_iso_date(Date date);
Date make_date(int year, unsigned month, unsigned day);

struct CivilDate {
  int year;
  unsigned month;        // 1..12
  unsigned day;          // 1..31
  unsigned day_of_week;  // 0 = Monday .. 6 = Sunday
  unsigned day_of_year;  // 1..366
};
CivilDate to_civil(Date date);

struct Checkin {
  std::string user_id;
  Date checkin;
  Date checkout;
  std::string city_id;
  std::string device_class;
  std::string affiliate_id;
  std::string booker_country;
  std::string hotel_country;
  std::string utrip_id;

  friend bool operator==(const Checkin&, const Checkin&) = default;
};

struct Trip {
  std::string utrip_id;
  std::vector<Checkin> checkins;

  std::size_t size() const noexcept { return checkins.size(); }
  friend bool operator==(const Trip&, const Trip&) = default;
};

/// Header names for each logical checkin field.
struct ColumnMap {
  std::string user_id = "user_id";
  std::string checkin = "checkin";
  std::string checkout = "checkout";
  std::string city_id = "city_id";
  std::string device_class = "device_class";
  std::string affiliate_id = "affiliate_id";
  std::string booker_country = "booker_country";
  std::string hotel_country = "hotel_country";
  std::string utrip_id = "utrip_id";

  /// camelCase variant (`checkinDate`, `cityId`, ...).
  static ColumnMap camel_case();
};

/// Reads comma-separated checkins with a header row. Columns not named in
/// `columns` are ignored.
std::vector<Checkin> parse_checkins(std::istream& source, const ColumnMap& columns = {});

/// Writes checkins with a header row using `columns` names, in ColumnMap field order.
void write_checkins(std::ostream& out, const std::vector<Checkin>& checkins,
                    const ColumnMap& columns = {});

inline constexpr std::size_t kMaxTripLength = 50;

/// Groups by utrip_id, sorts each trip by (checkin, checkout, city_id) and
/// keeps the most recent `max_length` checkins. Output sorted by utrip_id.
std::vector<Trip> assemble_trips(std::vector<Checkin> checkins,
                                 std::size_t max_length = kMaxTripLength);

struct DatasetSplit {
  std::vector<Trip> train;
  std::vector<Trip> validation;
  std::vector<Trip> holdout;
};

DatasetSplit split_dataset(const std::vector<Trip>& trips, std::size_t n_val,
                           std::size_t n_holdout, std::uint64_t seed);

/// Rebuilds a split from per-split utrip_id lists; trips not listed are dropped.
DatasetSplit split_from_ids(const std::vector<Trip>& trips, const std::vector<std::string>& train,
                            const std::vector<std::string>& validation,
                            const std::vector<std::string>& holdout);

struct SyntheticOptions {
  std::size_t n_trips = 1000;
  std::size_t n_cities = 64;
  std::size_t n_countries = 8;
  double transition_sharpness = 0.9;
  std::uint64_t seed = 1;
};

/// Markov-chain trips of length 2-8 over cities "0".."n_cities-1". With
/// probability `transition_sharpness` the next city is (city + 1) mod n_cities,
/// otherwise uniform. City c lies in country c * n_countries / n_cities.
std::vector<Checkin> generate_synthetic(const SyntheticOptions& options);

// ---------------------------------------------------------------------------
// Vocabularies

/// Dense indices 1..N for distinct values; index 0 is out-of-vocabulary.
class Vocab {
 public:
  static constexpr std::int32_t kUnknown = 0;

  /// Inserts if absent and returns the index.
  std::int32_t add(const std::string& value);
  std::int32_t index_of(const std::string& value) const noexcept;
  /// Empty string for kUnknown or out-of-range.
  const std::string& value_of(std::int32_t index) const noexcept;
  /// Number of real values (excludes index 0).
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<std::string>& values() const noexcept { return values_; }

  void write(std::ostream& out) const;
  static Vocab read(std::istream& in);

 private:
  std::unordered_map<std::string, std::int32_t> index_;
  std::vector<std::string> values_;  // values_[i - 1] has index i
};

struct Vocabs {
  Vocab city;
  Vocab country;  // shared by booker_country and hotel_country
  Vocab affiliate;
  /// city index -> most frequent hotel country index (0 when unknown).
  std::vector<std::int32_t> city_country;

  std::int32_t country_of_city(std::int32_t city) const noexcept {
    return city > 0 && static_cast<std::size_t>(city) < city_country.size() ? city_country[static_cast<std::size_t>(city)] : 0;
  }
};

Vocabs build_vocabs(const std::vector<Trip>& trips);

// ---------------------------------------------------------------------------
// Index-encoded trips used by the modelling modules

using CityIndex = std::int32_t;
using CountryIndex = std::int32_t;

struct EncodedCheckin {
  CityIndex city = 0;
  CountryIndex booker_country = 0;
  CountryIndex hotel_country = 0;
  std::int32_t affiliate = 0;
  Date checkin;
  Date checkout;

  friend bool operator==(const EncodedCheckin&, const EncodedCheckin&) = default;
};

struct EncodedTrip {
  std::string utrip_id;
  std::vector<EncodedCheckin> checkins;

  std::size_t size() const noexcept { return checkins.size(); }
};

EncodedCheckin encode(const Checkin& checkin, const Vocabs& vocabs);
EncodedTrip encode(const Trip& trip, const Vocabs& vocabs);
std::vector<EncodedTrip> encode(const std::vector<Trip>& trips, const Vocabs& vocabs);

}  // namespace triprank
