#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "triprank/dataset.hpp"
#include "triprank/features.hpp"
#include "triprank/nn/model.hpp"

namespace triprank::cli {

struct PrepareOptions {
  std::filesystem::path input;
  std::filesystem::path out;
  std::uint64_t seed = 1;
  std::size_t n_val = 4000;
  std::size_t n_holdout = 4000;
  /// Header uses userId/checkinDate/... instead of snake_case names.
  bool camel_case = false;
};

/// Files of a prepared data directory, relative to it.
namespace layout {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kCheckins = "checkins.csv";
inline constexpr const char* kTrainIds = "splits/train.txt";
inline constexpr const char* kValidationIds = "splits/validation.txt";
inline constexpr const char* kHoldoutIds = "splits/holdout.txt";
inline constexpr const char* kCityVocab = "vocab_city.txt";
inline constexpr const char* kCountryVocab = "vocab_country.txt";
inline constexpr const char* kAffiliateVocab = "vocab_affiliate.txt";
inline constexpr const char* kCityCountry = "city_country.txt";
inline constexpr const char* kFeatureSchema = "feature_schema.txt";
}  // namespace layout

/// Parses, assembles and splits the input, then writes the data directory.
/// Returns the number of trips.
std::size_t prepare_data(const PrepareOptions& options);

/// A prepared data directory loaded back into memory.
struct PreparedData {
  std::filesystem::path dir;
  Vocabs vocabs;
  DatasetSplit split;
  std::vector<EncodedTrip> train;
  std::vector<EncodedTrip> validation;
  std::vector<EncodedTrip> holdout;
  FeatureConfig features;
  std::uint64_t schema_hash = 0;

  /// "train", "validation" or "holdout"; throws InputError otherwise.
  const std::vector<EncodedTrip>& split_named(const std::string& name) const;
  nn::VocabSizes vocab_sizes() const noexcept;
};

/// Verifies the digests recorded in the directory manifest (InputError on a
/// mismatch) and loads every file.
PreparedData load_prepared(const std::filesystem::path& dir);

/// FNV-1a-64 over the feature schema, the three vocabularies and the
/// city -> country table of a data directory.
std::uint64_t schema_hash_of(const std::filesystem::path& dir);

}  // namespace triprank::cli
