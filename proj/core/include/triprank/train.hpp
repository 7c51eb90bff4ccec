#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "triprank/candidates.hpp"
#include "triprank/dataset.hpp"
#include "triprank/features.hpp"
#include "triprank/instances.hpp"
#include "triprank/ltr.hpp"
#include "triprank/nn/model.hpp"

namespace triprank {

struct TrainConfig {
  std::size_t trips_per_epoch = 10000;
  std::size_t patience = 50;
  std::size_t max_epochs = 500;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  LabelConfig labels;
  CandidateConfig candidates;
  std::size_t ndcg_k = 40;
  std::size_t acc_k = 4;
  double lambda_sigma = 1.0;
  /// Fit counting models once (first epoch) instead of every epoch.
  bool freeze_stats = false;
  /// Single-threaded preparation and no wall time in reports.
  bool deterministic = true;
  std::size_t threads = 1;

  /// Throws ConfigError on violated invariants.
  void validate() const;
};

struct EpochReport {
  std::size_t epoch = 0;
  double train_ndcg = 0.0;
  double val_ndcg = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
  std::size_t instances = 0;
  std::size_t skipped = 0;
};

/// Header `epoch,train_ndcg40,val_ndcg40,val_acc4,seconds`.
void write_epoch_csv_header(std::ostream& out);
/// Values printed with 17 significant digits.
void write_epoch_csv_row(std::ostream& out, const EpochReport& report);

/// Ranking quality of one set of trips where each trip's last city is the target.
struct EvalResult {
  double accuracy = 0.0;
  double ndcg = 0.0;
  /// Per-trip Accuracy@k hit (0/1), in trip order.
  std::vector<int> hits;

  std::size_t successes() const noexcept;
};

/// Produces a ranked city list from a prefix and the target checkin's known fields.
using Ranker = std::function<std::vector<CityIndex>(std::span<const EncodedCheckin> prefix,
                                                    const EncodedCheckin& target_context)>;

/// Accuracy@acc_k and NDCG@ndcg_k (single relevant item) of `ranker`.
/// Throws EmptyInput / TripTooShort.
EvalResult evaluate_ranker(std::span<const EncodedTrip> trips, const Ranker& ranker,
                           std::size_t acc_k = 4, std::size_t ndcg_k = 40);

/// Same metrics for the neural reranker over candidates built from `context`.
EvalResult evaluate_model(std::span<const EncodedTrip> trips, nn::RerankerModel& model,
                          const InstanceContext& context, std::size_t acc_k = 4,
                          std::size_t ndcg_k = 40, std::size_t batch_size = 64,
                          std::size_t threads = 1);

Ranker global_top_ranker(const FittedStats& stats);
Ranker last_city_country_ranker(const FittedStats& stats);
Ranker transition_chain_ranker(const FittedStats& stats);

/// Inputs the trainer needs beyond the model.
struct TrainingData {
  std::vector<EncodedTrip> train;
  std::vector<EncodedTrip> validation;
  std::vector<CountryIndex> city_country;
  FeatureConfig features;
};

/// Runs epochs over a fixed split, owning the per-epoch counting models.
class Trainer {
 public:
  Trainer(nn::RerankerModel& model, TrainingData data, TrainConfig config);

  /// Samples min(trips_per_epoch, |train|) trips for updates, refits counting
  /// models on the rest (keeping the previous ones when the rest is empty),
  /// relabels each sampled trip, applies LambdaRANK updates per batch and
  /// evaluates on validation.
  EpochReport run_epoch(std::size_t epoch);

  const FittedStats& stats() const { return *stats_; }
  InstanceContext instance_context() const;
  /// utrip_ids sampled for updates in the last epoch.
  const std::vector<std::string>& sampled_ids() const noexcept { return sampled_ids_; }
  /// utrip_ids the current counting models were fitted on.
  const std::vector<std::string>& stats_ids() const noexcept { return stats_ids_; }

 private:
  nn::RerankerModel& model_;
  TrainingData data_;
  TrainConfig config_;
  std::optional<FittedStats> stats_;
  std::vector<std::string> sampled_ids_;
  std::vector<std::string> stats_ids_;
};

/// Tracks the best metric and consecutive epochs without strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Returns true when `metric` improves on the best so far.
  bool update(std::size_t epoch, double metric);
  bool should_stop() const noexcept { return since_best_ >= patience_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_metric() const noexcept { return best_; }

 private:
  std::size_t patience_;
  double best_ = -1.0;
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
};

struct FitCallbacks {
  std::function<void(const EpochReport&)> on_epoch;
  /// Called with the improving report while the model holds its parameters.
  std::function<void(const EpochReport&, const nn::ParameterStore&)> on_improvement;
};

struct FitResult {
  nn::ParameterStore best_params;
  std::size_t best_epoch = 0;
  std::vector<EpochReport> reports;
};

/// Epoch loop with early stopping on val Accuracy@k. `run_epoch` receives
/// 1-based epoch numbers.
FitResult run_with_early_stopping(const std::function<EpochReport(std::size_t)>& run_epoch,
                                  const nn::RerankerModel* model, std::size_t patience,
                                  std::size_t max_epochs, const FitCallbacks& callbacks = {});

/// Trains `model` and leaves it holding the best epoch's parameters.
FitResult fit(nn::RerankerModel& model, TrainingData data, const TrainConfig& config,
              const FitCallbacks& callbacks = {});

}  // namespace triprank
