#include <string>

#include "triprank/dataset.hpp"
#include "triprank/random.hpp"

namespace triprank {

std::vector<Checkin> generate_synthetic(const SyntheticOptions& opt) {
  static const char* const kDevices[] = {"desktop", "mobile", "tablet"};
  constexpr std::int64_t kAffiliates = 12;
  const Date first_day = make_date(2016, 1, 1);
  constexpr std::int64_t kStartSpan = 3 * 365 - 40;  // trips start within the 3 calendar years

  Rng rng(opt.seed);
  const auto n_cities = static_cast<std::int64_t>(opt.n_cities);
  const auto country_of = [&](std::int64_t city) {
    return "K" + std::to_string(city * static_cast<std::int64_t>(opt.n_countries) / n_cities);
  };

  std::vector<Checkin> out;
  for (std::size_t t = 0; t < opt.n_trips; ++t) {
    const std::string user = "u" + std::to_string(t);
    const std::string utrip = user + "_1";
    const std::string booker = "K" + std::to_string(rng.below(opt.n_countries));
    const std::string device = kDevices[rng.below(3)];
    const std::string affiliate = "a" + std::to_string(rng.below(kAffiliates));
    const auto length = rng.between(2, 8);

    std::int64_t city = static_cast<std::int64_t>(rng.below(opt.n_cities));
    Date day{first_day.days + static_cast<std::int32_t>(rng.below(kStartSpan))};
    for (std::int64_t i = 0; i < length; ++i) {
      if (i > 0) {
        city = rng.bernoulli(opt.transition_sharpness)
                   ? (city + 1) % n_cities
                   : static_cast<std::int64_t>(rng.below(opt.n_cities));
      }
      const Date checkout{day.days + static_cast<std::int32_t>(rng.between(1, 5))};
      out.push_back(Checkin{user, day, checkout, std::to_string(city), device, affiliate, booker,
                            country_of(city), utrip});
      day = checkout;
    }
  }
  return out;
}

}  // namespace triprank
