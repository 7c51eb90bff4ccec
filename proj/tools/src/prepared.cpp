#include "triprank/cli/prepared.hpp"

#include <fstream>
#include <sstream>

#include "triprank/cli/manifest.hpp"
#include "triprank/error.hpp"
#include "triprank/hash.hpp"

namespace triprank::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::string slurp(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_ids(const fs::path& path, const std::vector<Trip>& trips) {
  auto out = open_out(path);
  for (const auto& t : trips) out << t.utrip_id << '\n';
}

std::vector<std::string> read_lines(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

Vocab read_vocab(const fs::path& path) {
  auto in = open_in(path);
  return Vocab::read(in);
}

}  // namespace

std::size_t prepare_data(const PrepareOptions& options) {
  std::vector<Trip> trips;
  {
    auto in = open_in(options.input);
    trips = assemble_trips(
        parse_checkins(in, options.camel_case ? ColumnMap::camel_case() : ColumnMap{}));
  }
  if (trips.empty()) throw EmptyInput("no checkins in " + options.input.string());
  const DatasetSplit split = split_dataset(trips, options.n_val, options.n_holdout, options.seed);
  const Vocabs vocabs = build_vocabs(trips);

  const fs::path& dir = options.out;
  fs::create_directories(dir / "splits");
  {
    std::vector<Checkin> flat;
    for (const auto& t : trips) flat.insert(flat.end(), t.checkins.begin(), t.checkins.end());
    auto out = open_out(dir / layout::kCheckins);
    write_checkins(out, flat);
  }
  write_ids(dir / layout::kTrainIds, split.train);
  write_ids(dir / layout::kValidationIds, split.validation);
  write_ids(dir / layout::kHoldoutIds, split.holdout);
  {
    auto out = open_out(dir / layout::kCityVocab);
    vocabs.city.write(out);
  }
  {
    auto out = open_out(dir / layout::kCountryVocab);
    vocabs.country.write(out);
  }
  {
    auto out = open_out(dir / layout::kAffiliateVocab);
    vocabs.affiliate.write(out);
  }
  {
    auto out = open_out(dir / layout::kCityCountry);
    for (std::size_t c = 1; c <= vocabs.city.size(); ++c)
      out << vocabs.country.value_of(vocabs.city_country[c]) << '\n';
  }
  {
    auto out = open_out(dir / layout::kFeatureSchema);
    out << feature_schema_text();
  }

  RunManifest m;
  m.command = "prepare";
  m.seed = options.seed;
  m.config = {{"seed", std::to_string(options.seed)},
              {"val", std::to_string(options.n_val)},
              {"holdout", std::to_string(options.n_holdout)},
              {"camel_case", options.camel_case ? "true" : "false"}};
  m.add_input(options.input);
  for (const char* file : {layout::kCheckins, layout::kTrainIds, layout::kValidationIds,
                           layout::kHoldoutIds, layout::kCityVocab, layout::kCountryVocab,
                           layout::kAffiliateVocab, layout::kCityCountry, layout::kFeatureSchema})
    m.add_output(dir / file, file);
  m.output_dir = dir.string();
  m.results = {{"trips", std::to_string(trips.size())},
               {"train", std::to_string(split.train.size())},
               {"validation", std::to_string(split.validation.size())},
               {"holdout", std::to_string(split.holdout.size())},
               {"schema_hash", to_hex(schema_hash_of(dir))}};
  write_manifest(dir / layout::kManifest, m);
  return trips.size();
}

std::uint64_t schema_hash_of(const fs::path& dir) {
  std::uint64_t h = kFnvOffset;
  for (const char* file : {layout::kFeatureSchema, layout::kCityVocab, layout::kCountryVocab,
                           layout::kAffiliateVocab, layout::kCityCountry}) {
    h = fnv1a64(file, h);
    h = fnv1a64(slurp(dir / file), h);
  }
  return h;
}

const std::vector<EncodedTrip>& PreparedData::split_named(const std::string& name) const {
  if (name == "train") return train;
  if (name == "validation" || name == "val") return validation;
  if (name == "holdout") return holdout;
  throw InputError("unknown split '" + name + "' (expected train, validation or holdout)");
}

nn::VocabSizes PreparedData::vocab_sizes() const noexcept {
  return {vocabs.city.size() + 1, vocabs.country.size() + 1, vocabs.affiliate.size() + 1};
}

PreparedData load_prepared(const fs::path& dir) {
  const RunManifest manifest = read_manifest(dir / layout::kManifest);
  verify_digests(manifest.outputs, dir);

  PreparedData d;
  d.dir = dir;
  std::vector<Trip> trips;
  {
    auto in = open_in(dir / layout::kCheckins);
    trips = assemble_trips(parse_checkins(in));
  }
  d.split = split_from_ids(trips, read_lines(dir / layout::kTrainIds),
                           read_lines(dir / layout::kValidationIds),
                           read_lines(dir / layout::kHoldoutIds));
  d.vocabs.city = read_vocab(dir / layout::kCityVocab);
  d.vocabs.country = read_vocab(dir / layout::kCountryVocab);
  d.vocabs.affiliate = read_vocab(dir / layout::kAffiliateVocab);
  const auto countries = read_lines(dir / layout::kCityCountry);
  if (countries.size() != d.vocabs.city.size())
    throw InputError("city_country table does not match the city vocabulary");
  d.vocabs.city_country.assign(d.vocabs.city.size() + 1, 0);
  for (std::size_t c = 0; c < countries.size(); ++c)
    d.vocabs.city_country[c + 1] = d.vocabs.country.index_of(countries[c]);

  d.train = encode(d.split.train, d.vocabs);
  d.validation = encode(d.split.validation, d.vocabs);
  d.holdout = encode(d.split.holdout, d.vocabs);
  d.features = fit_feature_config(d.train);
  d.schema_hash = schema_hash_of(dir);
  return d;
}

}  // namespace triprank::cli
