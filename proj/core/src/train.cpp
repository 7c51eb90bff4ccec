#include "triprank/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "triprank/error.hpp"
#include "triprank/parallel.hpp"

namespace triprank {

void TrainConfig::validate() const {
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (trips_per_epoch < batch_size) throw ConfigError("trips_per_epoch must be >= batch_size");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(lambda_sigma > 0.0)) throw ConfigError("lambda_sigma must be positive");
  if (ndcg_k < 1 || acc_k < 1) throw ConfigError("metric cutoffs must be >= 1");
  if (!(labels.min_fraction > 0.0) || labels.min_fraction > labels.max_fraction ||
      labels.max_fraction > 1.0)
    throw ConfigError("target fractions must satisfy 0 < min <= max <= 1");
  if (candidates.limit < 1) throw ConfigError("candidate limit must be >= 1");
}

void write_epoch_csv_header(std::ostream& out) {
  out << "epoch,train_ndcg40,val_ndcg40,val_acc4,seconds\n";
}

void write_epoch_csv_row(std::ostream& out, const EpochReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.train_ndcg, r.val_ndcg,
                r.val_accuracy, r.seconds);
  out << buf;
}

std::size_t EvalResult::successes() const noexcept {
  return static_cast<std::size_t>(std::accumulate(hits.begin(), hits.end(), 0));
}

namespace {

double single_target_ndcg(std::span<const CityIndex> ranked, CityIndex truth, std::size_t k) {
  const std::size_t n = std::min(k, ranked.size());
  for (std::size_t r = 0; r < n; ++r)
    if (ranked[r] == truth) return 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return 0.0;
}

void check_eval_input(std::span<const EncodedTrip> trips) {
  if (trips.empty()) throw EmptyInput("evaluate: no trips");
  for (const auto& t : trips)
    if (t.size() < 2) throw TripTooShort("evaluate: trip " + t.utrip_id + " has one checkin");
}

EvalResult summarize(std::vector<int> hits, double ndcg_sum) {
  EvalResult r;
  const auto n = static_cast<double>(hits.size());
  r.accuracy = static_cast<double>(std::accumulate(hits.begin(), hits.end(), 0)) / n;
  r.ndcg = ndcg_sum / n;
  r.hits = std::move(hits);
  return r;
}

}  // namespace

EvalResult evaluate_ranker(std::span<const EncodedTrip> trips, const Ranker& ranker,
                           std::size_t acc_k, std::size_t ndcg_k) {
  check_eval_input(trips);
  std::vector<int> hits;
  hits.reserve(trips.size());
  double ndcg = 0.0;
  for (const auto& trip : trips) {
    const auto prefix = std::span(trip.checkins).first(trip.size() - 1);
    const auto& last = trip.checkins.back();
    const auto ranked = ranker(prefix, last);
    hits.push_back(accuracy_at_k(ranked, last.city, acc_k));
    ndcg += single_target_ndcg(ranked, last.city, ndcg_k);
  }
  return summarize(std::move(hits), ndcg);
}

EvalResult evaluate_model(std::span<const EncodedTrip> trips, nn::RerankerModel& model,
                          const InstanceContext& context, std::size_t acc_k, std::size_t ndcg_k,
                          std::size_t batch_size, std::size_t threads) {
  check_eval_input(trips);
  const std::size_t n_batches = (trips.size() + batch_size - 1) / batch_size;
  std::vector<int> hits(trips.size(), 0);
  std::vector<double> ndcg(trips.size(), 0.0);

  parallel_for(n_batches, threads, [&](std::size_t bi) {
    const std::size_t begin = bi * batch_size;
    const std::size_t end = std::min(trips.size(), begin + batch_size);
    std::vector<RankingInstance> instances;
    instances.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& cs = trips[i].checkins;
      instances.push_back(build_instance(std::span(cs).first(cs.size() - 1), cs.back(), context));
    }
    const auto scores = model.predict(make_batch(instances));
    for (std::size_t i = begin; i < end; ++i) {
      const auto ranked = rank_candidates(instances[i - begin], scores[i - begin]);
      const CityIndex truth = trips[i].checkins.back().city;
      hits[i] = accuracy_at_k(ranked, truth, acc_k);
      ndcg[i] = single_target_ndcg(ranked, truth, ndcg_k);
    }
  });
  return summarize(std::move(hits), std::accumulate(ndcg.begin(), ndcg.end(), 0.0));
}

Ranker global_top_ranker(const FittedStats& stats) {
  return [&stats](std::span<const EncodedCheckin>, const EncodedCheckin&) {
    const auto& top = stats.popularity.global_top.ranked;
    return std::vector<CityIndex>(top.begin(), top.begin() + std::min<std::ptrdiff_t>(
                                                                 40, static_cast<std::ptrdiff_t>(top.size())));
  };
}

Ranker last_city_country_ranker(const FittedStats& stats) {
  return [&stats](std::span<const EncodedCheckin> prefix, const EncodedCheckin&) {
    if (prefix.empty()) return std::vector<CityIndex>{};
    const auto& top = stats.popularity.last_city_country(prefix.back().hotel_country).ranked;
    return std::vector<CityIndex>(top.begin(), top.begin() + std::min<std::ptrdiff_t>(
                                                                 40, static_cast<std::ptrdiff_t>(top.size())));
  };
}

Ranker transition_chain_ranker(const FittedStats& stats) {
  return [&stats](std::span<const EncodedCheckin> prefix, const EncodedCheckin&) {
    return transition_chain_scores(prefix, stats.transitions).ranked();
  };
}

// ---------------------------------------------------------------------------
// Trainer

Trainer::Trainer(nn::RerankerModel& model, TrainingData data, TrainConfig config)
    : model_(model), data_(std::move(data)), config_(config) {
  config_.validate();
  if (config_.deterministic) config_.threads = 1;
}

InstanceContext Trainer::instance_context() const {
  InstanceContext ctx;
  ctx.stats = &*stats_;
  ctx.city_country = data_.city_country;
  ctx.features = data_.features;
  ctx.candidates = config_.candidates;
  ctx.candidates.limit = std::min(ctx.candidates.limit, model_.config().max_candidates);
  ctx.max_prefix = model_.config().trip_len;
  return ctx;
}

EpochReport Trainer::run_epoch(std::size_t epoch) {
  const auto started = std::chrono::steady_clock::now();
  const std::uint64_t epoch_seed = mix_seed(config_.seed, epoch);
  Rng rng(epoch_seed);

  const auto& train = data_.train;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t n_sampled = std::min(config_.trips_per_epoch, train.size());
  std::vector<std::size_t> sampled(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_sampled));
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(n_sampled), order.end());
  std::sort(rest.begin(), rest.end());

  sampled_ids_.clear();
  for (const auto i : sampled) sampled_ids_.push_back(train[i].utrip_id);

  const bool refit = !stats_ || (!config_.freeze_stats && !rest.empty());
  if (refit) {
    std::vector<EncodedTrip> fit_trips;
    fit_trips.reserve(rest.size());
    stats_ids_.clear();
    for (const auto i : rest) {
      fit_trips.push_back(train[i]);
      stats_ids_.push_back(train[i].utrip_id);
    }
    stats_ = fit_stats(fit_trips);
  }
  const InstanceContext ctx = instance_context();

  // Instance preparation: every trip has its own seeded stream, so results do
  // not depend on the worker count.
  std::vector<std::optional<RankingInstance>> prepared(sampled.size());
  parallel_for(sampled.size(), config_.threads, [&](std::size_t k) {
    const EncodedTrip& trip = train[sampled[k]];
    if (trip.size() < 2) return;
    Rng trip_rng(mix_seed(epoch_seed, sampled[k]));
    const LabeledInstance labels = make_labels(trip.checkins, trip_rng, config_.labels);
    const auto prefix = std::span(trip.checkins).first(labels.prefix_length);
    RankingInstance inst = build_instance(prefix, trip.checkins[labels.prefix_length], ctx);
    attach_labels(inst, labels);
    if (inst.candidates.size() < 2 || !inst.has_relevant()) return;
    prepared[k] = std::move(inst);
  });

  std::vector<const RankingInstance*> usable;
  for (const auto& p : prepared)
    if (p) usable.push_back(&*p);

  EpochReport report;
  report.epoch = epoch;
  report.instances = usable.size();
  report.skipped = sampled.size() - usable.size();

  const LambdaConfig lambda{config_.lambda_sigma, config_.ndcg_k};
  const nn::AdamConfig adam{config_.lr};
  double ndcg_sum = 0.0;
  for (std::size_t begin = 0; begin < usable.size(); begin += config_.batch_size) {
    const std::size_t end = std::min(usable.size(), begin + config_.batch_size);
    const auto members = std::span(usable).subspan(begin, end - begin);
    const nn::ModelBatch batch = make_batch(members);

    nn::Tape tape;
    const nn::Var scores = model_.forward(tape, batch);
    nn::Tensor seed(scores.shape());
    const double inv_batch = 1.0 / static_cast<double>(members.size());
    for (std::size_t b = 0; b < members.size(); ++b) {
      const auto& labels = members[b]->labels;
      const std::span<const double> s(scores.value().data() + b * batch.n_candidates, labels.size());
      ndcg_sum += ndcg_at_k(s, labels, config_.ndcg_k);
      const auto lambdas = lambdarank_gradients(s, labels, lambda);
      // Adam minimizes, lambdas point uphill.
      for (std::size_t j = 0; j < lambdas.size(); ++j)
        seed[b * batch.n_candidates + j] = -lambdas[j] * inv_batch;
    }
    tape.backward(scores, seed);
    nn::adam_step(model_.params(), adam);
  }
  report.train_ndcg = usable.empty() ? 0.0 : ndcg_sum / static_cast<double>(usable.size());

  const EvalResult val = evaluate_model(data_.validation, model_, ctx, config_.acc_k,
                                        config_.ndcg_k, config_.batch_size, config_.threads);
  report.val_accuracy = val.accuracy;
  report.val_ndcg = val.ndcg;
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  report.seconds = config_.deterministic ? 0.0 : elapsed;
  return report;
}

// ---------------------------------------------------------------------------
// Early stopping

bool EarlyStopping::update(std::size_t epoch, double metric) {
  if (best_epoch_ == 0 || metric > best_) {
    best_ = metric;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

FitResult run_with_early_stopping(const std::function<EpochReport(std::size_t)>& run_epoch,
                                  const nn::RerankerModel* model, std::size_t patience,
                                  std::size_t max_epochs, const FitCallbacks& callbacks) {
  FitResult result;
  EarlyStopping stopper(patience);
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    EpochReport report = run_epoch(epoch);
    result.reports.push_back(report);
    if (callbacks.on_epoch) callbacks.on_epoch(report);
    if (stopper.update(epoch, report.val_accuracy)) {
      result.best_epoch = epoch;
      if (model != nullptr) {
        result.best_params = model->params();
        if (callbacks.on_improvement) callbacks.on_improvement(report, result.best_params);
      }
    }
    if (stopper.should_stop()) break;
  }
  return result;
}

FitResult fit(nn::RerankerModel& model, TrainingData data, const TrainConfig& config,
              const FitCallbacks& callbacks) {
  Trainer trainer(model, std::move(data), config);
  FitResult result = run_with_early_stopping(
      [&](std::size_t epoch) { return trainer.run_epoch(epoch); }, &model, config.patience,
      config.max_epochs, callbacks);
  if (result.best_epoch > 0) model.params().copy_values_from(result.best_params);
  return result;
}

}  // namespace triprank
