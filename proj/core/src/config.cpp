#include "triprank/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "triprank/error.hpp"

namespace triprank {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for doubles is missing from older libstdc++.
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    in >> value;
    if (!in || !(in >> std::ws).eof()) throw ConfigError(key + ": not a number: " + text);
  } else {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      throw ConfigError(key + ": not a non-negative integer: " + text);
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key + ": expected true or false: " + text);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(TrainConfig&, const std::string& key, const std::string&)>;

const std::map<std::string, Setter>& train_setters() {
  static const std::map<std::string, Setter> setters = {
      {"trips_per_epoch", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.trips_per_epoch = parse_number<std::size_t>(k, v); }},
      {"patience", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.patience = parse_number<std::size_t>(k, v); }},
      {"max_epochs", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.max_epochs = parse_number<std::size_t>(k, v); }},
      {"batch_size", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.batch_size = parse_number<std::size_t>(k, v); }},
      {"lr", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.lr = parse_number<double>(k, v); }},
      {"seed", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.seed = parse_number<std::uint64_t>(k, v); }},
      {"min_target_fraction", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.labels.min_fraction = parse_number<double>(k, v); }},
      {"max_target_fraction", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.labels.max_fraction = parse_number<double>(k, v); }},
      {"candidate_limit", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.candidates.limit = parse_number<std::size_t>(k, v); }},
      {"candidate_transition_quota", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.candidates.transition_quota = parse_number<std::size_t>(k, v); }},
      {"candidate_booker_trip_quota", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.candidates.booker_trip_quota = parse_number<std::size_t>(k, v); }},
      {"ndcg_k", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.ndcg_k = parse_number<std::size_t>(k, v); }},
      {"acc_k", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.acc_k = parse_number<std::size_t>(k, v); }},
      {"lambda_sigma", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.lambda_sigma = parse_number<double>(k, v); }},
      {"freeze_stats", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.freeze_stats = parse_bool(k, v); }},
      {"deterministic", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.deterministic = parse_bool(k, v); }},
      {"threads", [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.threads = parse_number<std::size_t>(k, v); }},
  };
  return setters;
}

}  // namespace

std::map<std::string, std::string> RunConfig::to_entries() const {
  auto out = model.to_entries();
  const TrainConfig& t = train;
  out["trips_per_epoch"] = std::to_string(t.trips_per_epoch);
  out["patience"] = std::to_string(t.patience);
  out["max_epochs"] = std::to_string(t.max_epochs);
  out["batch_size"] = std::to_string(t.batch_size);
  out["lr"] = format_double(t.lr);
  out["seed"] = std::to_string(t.seed);
  out["min_target_fraction"] = format_double(t.labels.min_fraction);
  out["max_target_fraction"] = format_double(t.labels.max_fraction);
  out["candidate_limit"] = std::to_string(t.candidates.limit);
  out["candidate_transition_quota"] = std::to_string(t.candidates.transition_quota);
  out["candidate_booker_trip_quota"] = std::to_string(t.candidates.booker_trip_quota);
  out["ndcg_k"] = std::to_string(t.ndcg_k);
  out["acc_k"] = std::to_string(t.acc_k);
  out["lambda_sigma"] = format_double(t.lambda_sigma);
  out["freeze_stats"] = t.freeze_stats ? "true" : "false";
  out["deterministic"] = t.deterministic ? "true" : "false";
  out["threads"] = std::to_string(t.threads);
  return out;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (train.candidates.limit > model.max_candidates)
    throw ConfigError("candidate_limit exceeds max_candidates");
}

RunConfig run_config_from_entries(const std::map<std::string, std::string>& entries,
                                  bool ignore_unknown) {
  const auto model_keys = nn::ModelConfig{}.to_entries();
  std::map<std::string, std::string> model_entries;
  RunConfig config;
  for (const auto& [key, value] : entries) {
    if (model_keys.count(key)) {
      model_entries[key] = value;
    } else if (const auto it = train_setters().find(key); it != train_setters().end()) {
      it->second(config.train, key, value);
    } else if (!ignore_unknown) {
      throw ConfigError("unknown config key " + key);
    }
  }
  config.model = nn::ModelConfig::from_entries(model_entries);
  config.validate();
  return config;
}

RunConfig parse_run_config(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    if (!entries.emplace(key, trim(std::string_view(text).substr(eq + 1))).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key " + key);
  }
  return run_config_from_entries(entries);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  return parse_run_config(in);
}

void write_run_config(std::ostream& out, const RunConfig& config) {
  for (const auto& [k, v] : config.to_entries()) out << k << " = " << v << '\n';
}

}  // namespace triprank
