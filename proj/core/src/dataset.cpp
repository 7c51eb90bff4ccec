#include "triprank/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <optional>
#include <unordered_set>

#include "triprank/error.hpp"
#include "triprank/random.hpp"

namespace triprank {

namespace {

namespace chr = std::chrono;

bool parse_digits(std::string_view text, int& out) noexcept {
  int value = 0;
  for (const char c : text) {
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

// Numeric ids compare as numbers ("4" < "10"); anything else lexicographically.
int compare_ids(std::string_view a, std::string_view b) noexcept {
  const auto numeric = [](std::string_view s) {
    return !s.empty() && s.size() < 19 &&
           std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (numeric(a) && numeric(b)) {
    const auto x = std::stoll(std::string(a));
    const auto y = std::stoll(std::string(b));
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  return a.compare(b) < 0 ? -1 : (a == b ? 0 : 1);
}

}  // namespace

bool parse_iso_date(std::string_view text, Date& out) noexcept {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  int y = 0, m = 0, d = 0;
  if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
      !parse_digits(text.substr(8, 2), d))
    return false;
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return false;
  out.days = static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count());
  return true;
}

Date make_date(int year, unsigned month, unsigned day) {
  const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  return Date{static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count())};
}

std::string format_iso_date(Date date) {
  const CivilDate c = to_civil(date);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
  return buf;
}

CivilDate to_civil(Date date) {
  const chr::sys_days days{chr::days{date.days}};
  const chr::year_month_day ymd{days};
  const chr::weekday wd{days};
  const chr::sys_days jan1{ymd.year() / chr::January / 1};
  return CivilDate{
      static_cast<int>(ymd.year()),
      static_cast<unsigned>(ymd.month()),
      static_cast<unsigned>(ymd.day()),
      wd.iso_encoding() - 1,
      static_cast<unsigned>((days - jan1).count() + 1),
  };
}

ColumnMap ColumnMap::camel_case() {
  return ColumnMap{"userId",   "checkinDate",   "checkoutDate", "cityId",  "deviceClass",
                   "affiliateId", "bookerCountry", "hotelCountry", "utripId"};
}

std::vector<Checkin> parse_checkins(std::istream& source, const ColumnMap& columns) {
  std::string line;
  if (!std::getline(source, line)) return {};

  std::vector<std::string> header;
  for (const auto field : split_commas(line)) header.emplace_back(trim(field));

  const auto locate = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw MissingColumn(name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_user = locate(columns.user_id);
  const std::size_t c_in = locate(columns.checkin);
  const std::size_t c_out = locate(columns.checkout);
  const std::size_t c_city = locate(columns.city_id);
  const std::size_t c_device = locate(columns.device_class);
  const std::size_t c_aff = locate(columns.affiliate_id);
  const std::size_t c_booker = locate(columns.booker_country);
  const std::size_t c_hotel = locate(columns.hotel_country);
  const std::size_t c_trip = locate(columns.utrip_id);

  std::vector<Checkin> out;
  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) throw MalformedRow(line_no, header.size(), fields.size());

    Checkin c;
    c.user_id = trim(fields[c_user]);
    const auto in_text = trim(fields[c_in]);
    const auto out_text = trim(fields[c_out]);
    if (!parse_iso_date(in_text, c.checkin)) throw BadDate(line_no, std::string(in_text));
    if (!parse_iso_date(out_text, c.checkout)) throw BadDate(line_no, std::string(out_text));
    if (c.checkout < c.checkin)
      throw InputError("checkout before checkin at line " + std::to_string(line_no));
    c.city_id = trim(fields[c_city]);
    c.device_class = trim(fields[c_device]);
    c.affiliate_id = trim(fields[c_aff]);
    c.booker_country = trim(fields[c_booker]);
    c.hotel_country = trim(fields[c_hotel]);
    c.utrip_id = trim(fields[c_trip]);
    for (const auto& [value, name] :
         {std::pair{&c.user_id, &columns.user_id}, {&c.city_id, &columns.city_id},
          {&c.device_class, &columns.device_class}, {&c.affiliate_id, &columns.affiliate_id},
          {&c.booker_country, &columns.booker_country}, {&c.hotel_country, &columns.hotel_country},
          {&c.utrip_id, &columns.utrip_id}})
      if (value->empty())
        throw InputError("empty " + *name + " at line " + std::to_string(line_no));
    out.push_back(std::move(c));
  }
  return out;
}

void write_checkins(std::ostream& out, const std::vector<Checkin>& checkins,
                    const ColumnMap& columns) {
  out << columns.user_id << ',' << columns.checkin << ',' << columns.checkout << ','
      << columns.city_id << ',' << columns.device_class << ',' << columns.affiliate_id << ','
      << columns.booker_country << ',' << columns.hotel_country << ',' << columns.utrip_id << '\n';
  for (const auto& c : checkins) {
    out << c.user_id << ',' << format_iso_date(c.checkin) << ',' << format_iso_date(c.checkout)
        << ',' << c.city_id << ',' << c.device_class << ',' << c.affiliate_id << ','
        << c.booker_country << ',' << c.hotel_country << ',' << c.utrip_id << '\n';
  }
}

std::vector<Trip> assemble_trips(std::vector<Checkin> checkins, std::size_t max_length) {
  std::map<std::string, std::vector<Checkin>> grouped;
  for (auto& c : checkins) grouped[c.utrip_id].push_back(std::move(c));

  std::vector<Trip> trips;
  trips.reserve(grouped.size());
  for (auto& [id, rows] : grouped) {
    // Full key including the remaining fields so the order never depends on input order.
    std::sort(rows.begin(), rows.end(), [](const Checkin& a, const Checkin& b) {
      if (a.checkin != b.checkin) return a.checkin < b.checkin;
      if (a.checkout != b.checkout) return a.checkout < b.checkout;
      if (const int c = compare_ids(a.city_id, b.city_id); c != 0) return c < 0;
      return std::tie(a.hotel_country, a.affiliate_id, a.booker_country, a.device_class,
                      a.user_id) < std::tie(b.hotel_country, b.affiliate_id, b.booker_country,
                                            b.device_class, b.user_id);
    });
    if (max_length > 0 && rows.size() > max_length)
      rows.erase(rows.begin(), rows.end() - static_cast<std::ptrdiff_t>(max_length));
    trips.push_back(Trip{id, std::move(rows)});
  }
  return trips;
}

DatasetSplit split_dataset(const std::vector<Trip>& trips, std::size_t n_val,
                           std::size_t n_holdout, std::uint64_t seed) {
  if (trips.size() <= n_val + n_holdout)
    throw TooFewTrips("need more than " + std::to_string(n_val + n_holdout) + " trips, got " +
                      std::to_string(trips.size()));

  std::vector<std::size_t> order(trips.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  const auto take = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                 order.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(idx.begin(), idx.end());
    std::vector<Trip> out;
    out.reserve(idx.size());
    for (const auto i : idx) out.push_back(trips[i]);
    return out;
  };

  DatasetSplit split;
  split.validation = take(0, n_val);
  split.holdout = take(n_val, n_val + n_holdout);
  split.train = take(n_val + n_holdout, trips.size());
  return split;
}

DatasetSplit split_from_ids(const std::vector<Trip>& trips, const std::vector<std::string>& train,
                            const std::vector<std::string>& validation,
                            const std::vector<std::string>& holdout) {
  std::unordered_map<std::string_view, const Trip*> by_id;
  for (const auto& t : trips) by_id.emplace(t.utrip_id, &t);
  std::unordered_set<std::string_view> used;
  const auto collect = [&](const std::vector<std::string>& ids) {
    std::vector<Trip> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw InputError("split lists unknown trip '" + id + "'");
      if (!used.insert(it->first).second) throw InputError("trip '" + id + "' listed twice");
      out.push_back(*it->second);
    }
    return out;
  };
  return DatasetSplit{collect(train), collect(validation), collect(holdout)};
}

EncodedCheckin encode(const Checkin& c, const Vocabs& vocabs) {
  return EncodedCheckin{vocabs.city.index_of(c.city_id), vocabs.country.index_of(c.booker_country),
                        vocabs.country.index_of(c.hotel_country),
                        vocabs.affiliate.index_of(c.affiliate_id), c.checkin, c.checkout};
}

EncodedTrip encode(const Trip& trip, const Vocabs& vocabs) {
  EncodedTrip out{trip.utrip_id, {}};
  out.checkins.reserve(trip.size());
  for (const auto& c : trip.checkins) out.checkins.push_back(encode(c, vocabs));
  return out;
}

std::vector<EncodedTrip> encode(const std::vector<Trip>& trips, const Vocabs& vocabs) {
  std::vector<EncodedTrip> out;
  out.reserve(trips.size());
  for (const auto& t : trips) out.push_back(encode(t, vocabs));
  return out;
}

}  // namespace triprank
