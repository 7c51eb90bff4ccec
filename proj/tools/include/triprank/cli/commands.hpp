#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "triprank/cli/prepared.hpp"
#include "triprank/config.hpp"
#include "triprank/nn/model.hpp"
#include "triprank/train.hpp"

namespace triprank::cli {

struct TrainOptions {
  std::filesystem::path data;
  std::filesystem::path config;
  std::filesystem::path out;
};

struct EvaluateOptions {
  std::filesystem::path data;
  std::filesystem::path model;
  std::string split = "holdout";
  std::optional<std::filesystem::path> manifest;
};

struct CompareOptions {
  std::filesystem::path data;
  /// Baseline names (GlobalTop, LastCityCountryTop, TransitionChain) or checkpoint paths.
  std::vector<std::string> models;
  std::string split = "holdout";
  std::optional<std::filesystem::path> manifest;
};

struct PredictOptions {
  std::filesystem::path model;
  /// Path to a JSON file, or the JSON text itself when it starts with '['.
  std::string trip;
  std::size_t top = 4;
  /// Overrides the data directory recorded in the checkpoint.
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> dump_candidates;
  std::optional<std::filesystem::path> manifest;
};

/// `requested` (0 = hardware concurrency) capped by TRIPRANK_THREADS.
std::size_t resolve_threads(std::size_t requested);

/// Checkpointed reranker with the run configuration it was trained with.
struct LoadedModel {
  RunConfig config;
  std::unique_ptr<nn::RerankerModel> model;
};

/// Throws SchemaMismatch when the checkpoint was built against other vocabularies.
LoadedModel load_model(const std::filesystem::path& checkpoint, const PreparedData& data);

InstanceContext make_context(const FittedStats& stats, const PreparedData& data,
                             const RunConfig& config);

struct CompareRow {
  std::string name;
  EvalResult result;
  /// Two-tailed z-test p-value of Accuracy@4 against the best row.
  double p_value = 1.0;
};

/// Counting models are refitted on the whole train split.
std::vector<CompareRow> compare_models(const PreparedData& data, const std::vector<std::string>& models,
                                       const std::string& split, std::size_t threads);

/// A trip prefix plus the known fields of the checkin to predict.
struct TripQuery {
  std::vector<Checkin> prefix;
  Checkin target;
};

/// JSON array of checkin objects keyed like the CSV columns; the last object
/// is the target context and may omit city_id and hotel_country.
TripQuery parse_trip_json(const std::string& text);

int cmd_synth(const SyntheticOptions& options, const std::filesystem::path& path, std::ostream& out);
int cmd_prepare(const PrepareOptions& options, std::ostream& out);
int cmd_train(const TrainOptions& options, std::ostream& out);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& out);
int cmd_compare(const CompareOptions& options, std::ostream& out);
int cmd_predict(const PredictOptions& options, std::ostream& out);

}  // namespace triprank::cli
