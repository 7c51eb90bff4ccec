#include "triprank/dataset.hpp"

#include <string>

namespace triprank {

std::int32_t Vocab::add(const std::string& value) {
  const auto [it, inserted] =
      index_.try_emplace(value, static_cast<std::int32_t>(values_.size() + 1));
  if (inserted) values_.push_back(value);
  return it->second;
}

std::int32_t Vocab::index_of(const std::string& value) const noexcept {
  const auto it = index_.find(value);
  return it == index_.end() ? kUnknown : it->second;
}

const std::string& Vocab::value_of(std::int32_t index) const noexcept {
  static const std::string kEmpty;
  if (index <= 0 || static_cast<std::size_t>(index) > values_.size()) return kEmpty;
  return values_[static_cast<std::size_t>(index - 1)];
}

void Vocab::write(std::ostream& out) const {
  for (const auto& v : values_) out << v << '\n';
}

Vocab Vocab::read(std::istream& in) {
  Vocab vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    vocab.add(line);
  }
  return vocab;
}

Vocabs build_vocabs(const std::vector<Trip>& trips) {
  Vocabs v;
  // First-seen order over utrip-sorted trips keeps indices deterministic.
  std::map<std::pair<std::int32_t, std::int32_t>, std::size_t> city_country_counts;
  for (const auto& trip : trips) {
    for (const auto& c : trip.checkins) {
      const auto city = v.city.add(c.city_id);
      v.country.add(c.booker_country);
      const auto hotel = v.country.add(c.hotel_country);
      v.affiliate.add(c.affiliate_id);
      ++city_country_counts[{city, hotel}];
    }
  }
  v.city_country.assign(v.city.size() + 1, 0);
  std::vector<std::size_t> best(v.city.size() + 1, 0);
  for (const auto& [key, count] : city_country_counts) {
    const auto city = static_cast<std::size_t>(key.first);
    if (count > best[city]) {  // map order: smaller country wins ties
      best[city] = count;
      v.city_country[city] = key.second;
    }
  }
  return v;
}

}  // namespace triprank
