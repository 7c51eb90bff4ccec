#include "triprank/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "triprank/cli/manifest.hpp"
#include "triprank/error.hpp"
#include "triprank/hash.hpp"
#include "triprank/nn/checkpoint.hpp"

namespace triprank::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kModelInitStream = 0x6d6f64656c;

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::size_t resolve_threads(std::size_t requested) {
  std::size_t n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (const char* env = std::getenv("TRIPRANK_THREADS"); env != nullptr && *env != '\0') {
    std::size_t cap = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
    if (ec != std::errc{} || ptr != text.data() + text.size() || cap == 0)
      throw ConfigError("TRIPRANK_THREADS must be a positive integer");
    n = std::min(n, cap);
  }
  return n;
}

LoadedModel load_model(const fs::path& checkpoint, const PreparedData& data) {
  const nn::Checkpoint ckpt = nn::read_checkpoint(checkpoint, data.schema_hash);
  LoadedModel loaded;
  loaded.config = run_config_from_entries(ckpt.config, true);
  loaded.model = std::make_unique<nn::RerankerModel>(loaded.config.model, data.vocab_sizes(), 0);
  nn::load_parameters(ckpt, loaded.model->params());
  return loaded;
}

InstanceContext make_context(const FittedStats& stats, const PreparedData& data,
                             const RunConfig& config) {
  InstanceContext ctx;
  ctx.stats = &stats;
  ctx.city_country = data.vocabs.city_country;
  ctx.features = data.features;
  ctx.candidates = config.train.candidates;
  ctx.candidates.limit = std::min(ctx.candidates.limit, config.model.max_candidates);
  ctx.max_prefix = config.model.trip_len;
  return ctx;
}

std::vector<CompareRow> compare_models(const PreparedData& data, const std::vector<std::string>& models,
                                       const std::string& split, std::size_t threads) {
  if (models.empty()) throw InputError("compare: no models given");
  const auto& trips = data.split_named(split);
  const FittedStats stats = fit_stats(data.train);
  std::vector<CompareRow> rows;
  for (const auto& name : models) {
    CompareRow row;
    row.name = name;
    if (name == "GlobalTop") {
      row.result = evaluate_ranker(trips, global_top_ranker(stats));
    } else if (name == "LastCityCountryTop") {
      row.result = evaluate_ranker(trips, last_city_country_ranker(stats));
    } else if (name == "TransitionChain") {
      row.result = evaluate_ranker(trips, transition_chain_ranker(stats));
    } else if (fs::exists(name)) {
      const LoadedModel loaded = load_model(name, data);
      row.result = evaluate_model(trips, *loaded.model, make_context(stats, data, loaded.config), 4,
                                  40, loaded.config.train.batch_size, threads);
    } else {
      throw InputError("compare: '" + name +
                       "' is neither a baseline (GlobalTop, LastCityCountryTop, TransitionChain) "
                       "nor a checkpoint file");
    }
    rows.push_back(std::move(row));
  }
  const auto best = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.result.accuracy < b.result.accuracy;
  });
  for (auto& row : rows)
    row.p_value = two_proportion_z_test(row.result.successes(), best->result.successes(),
                                        trips.size());
  return rows;
}

TripQuery parse_trip_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("trip JSON: ") + e.what());
  }
  if (!j.is_array() || j.size() < 2)
    throw InputError("trip JSON must be an array of at least one checkin plus the target context");

  const auto field = [](const json& obj, const char* key, bool required) -> std::string {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (required) throw InputError(std::string("trip JSON: missing field ") + key);
      return {};
    }
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw InputError(std::string("trip JSON: field ") + key + " must be a string or integer");
  };
  const auto date = [&](const json& obj, const char* key) {
    const std::string value = field(obj, key, true);
    Date d;
    if (!parse_iso_date(value, d)) throw InputError("trip JSON: bad date '" + value + "'");
    return d;
  };
  const auto checkin = [&](const json& obj, bool is_target) {
    if (!obj.is_object()) throw InputError("trip JSON: every element must be an object");
    Checkin c;
    c.user_id = field(obj, "user_id", false);
    c.checkin = date(obj, "checkin");
    c.checkout = date(obj, "checkout");
    c.city_id = field(obj, "city_id", !is_target);
    c.device_class = field(obj, "device_class", false);
    c.affiliate_id = field(obj, "affiliate_id", false);
    c.booker_country = field(obj, "booker_country", false);
    c.hotel_country = field(obj, "hotel_country", false);
    c.utrip_id = field(obj, "utrip_id", false);
    return c;
  };

  TripQuery q;
  for (std::size_t i = 0; i + 1 < j.size(); ++i) q.prefix.push_back(checkin(j[i], false));
  q.target = checkin(j.back(), true);
  return q;
}

// ---------------------------------------------------------------------------

int cmd_synth(const SyntheticOptions& options, const fs::path& path, std::ostream& out) {
  const auto checkins = generate_synthetic(options);
  {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + path.string());
    write_checkins(file, checkins);
  }
  out << "wrote " << checkins.size() << " checkins (" << options.n_trips << " trips) to "
      << path.string() << '\n';
  return 0;
}

int cmd_prepare(const PrepareOptions& options, std::ostream& out) {
  const std::size_t n = prepare_data(options);
  const RunManifest m = read_manifest(options.out / layout::kManifest);
  out << "prepared " << n << " trips: train " << m.results.at("train") << ", validation "
      << m.results.at("validation") << ", holdout " << m.results.at("holdout") << '\n';
  return 0;
}

int cmd_train(const TrainOptions& options, std::ostream& out) {
  const PreparedData data = load_prepared(options.data);
  RunConfig config = load_run_config(options.config);
  config.train.threads = resolve_threads(config.train.threads);
  fs::create_directories(options.out);

  nn::RerankerModel model(config.model, data.vocab_sizes(),
                          mix_seed(config.train.seed, kModelInitStream));
  auto entries = config.to_entries();
  entries["data_dir"] = fs::absolute(options.data).lexically_normal().string();

  const fs::path ckpt_path = options.out / "best.ckpt";
  const fs::path epochs_path = options.out / "epochs.csv";
  const fs::path metrics_path = options.out / "metrics.csv";
  std::ofstream epochs(epochs_path, std::ios::binary);
  std::ofstream metrics(metrics_path, std::ios::binary);
  if (!epochs || !metrics) throw std::runtime_error("cannot write to " + options.out.string());
  write_epoch_csv_header(epochs);
  metrics << "epoch,split,metric,value\n";

  FitCallbacks callbacks;
  callbacks.on_epoch = [&](const EpochReport& r) {
    write_epoch_csv_row(epochs, r);
    epochs.flush();
    metrics << r.epoch << ",train,ndcg_at_40," << fmt(r.train_ndcg, "%.17g") << '\n'
            << r.epoch << ",validation,ndcg_at_40," << fmt(r.val_ndcg, "%.17g") << '\n'
            << r.epoch << ",validation,accuracy_at_4," << fmt(r.val_accuracy, "%.17g") << '\n';
    metrics.flush();
    out << "epoch " << r.epoch << "  train_ndcg40 " << fmt(r.train_ndcg) << "  val_ndcg40 "
        << fmt(r.val_ndcg) << "  val_acc4 " << fmt(r.val_accuracy) << "  instances " << r.instances;
    if (r.skipped > 0) out << "  skipped " << r.skipped;
    out << '\n';
    out.flush();
  };
  callbacks.on_improvement = [&](const EpochReport& r, const nn::ParameterStore& params) {
    auto with_epoch = entries;
    with_epoch["epoch"] = std::to_string(r.epoch);
    nn::write_checkpoint(ckpt_path, nn::make_checkpoint(data.schema_hash, with_epoch, params));
  };

  TrainingData training{data.train, data.validation, data.vocabs.city_country, data.features};
  const FitResult result = fit(model, std::move(training), config.train, callbacks);
  epochs.close();
  metrics.close();

  const auto& best = result.reports.at(result.best_epoch - 1);
  RunManifest m;
  m.command = "train";
  m.config = entries;
  m.seed = config.train.seed;
  m.add_input(options.config);
  m.add_input(options.data / layout::kManifest);
  m.output_dir = options.out.string();
  m.add_output(ckpt_path, "best.ckpt");
  m.add_output(epochs_path, "epochs.csv");
  m.add_output(metrics_path, "metrics.csv");
  m.results = {{"best_epoch", std::to_string(result.best_epoch)},
               {"epochs_run", std::to_string(result.reports.size())},
               {"best_val_accuracy_at_4", fmt(best.val_accuracy, "%.17g")},
               {"best_val_ndcg_at_40", fmt(best.val_ndcg, "%.17g")}};
  write_manifest(options.out / "run_manifest.json", m);
  out << "best epoch " << result.best_epoch << "  val_acc4 " << fmt(best.val_accuracy)
      << "  checkpoint " << ckpt_path.string() << '\n';
  return 0;
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out) {
  const PreparedData data = load_prepared(options.data);
  const LoadedModel loaded = load_model(options.model, data);
  const FittedStats stats = fit_stats(data.train);
  const auto& trips = data.split_named(options.split);
  const auto& t = loaded.config.train;
  const EvalResult r = evaluate_model(trips, *loaded.model, make_context(stats, data, loaded.config),
                                      t.acc_k, t.ndcg_k, t.batch_size, resolve_threads(0));
  const std::string acc_name = "accuracy_at_" + std::to_string(t.acc_k);
  const std::string ndcg_name = "ndcg_at_" + std::to_string(t.ndcg_k);
  out << "split,trips," << acc_name << ',' << ndcg_name << '\n'
      << options.split << ',' << trips.size() << ',' << fmt(r.accuracy) << ',' << fmt(r.ndcg) << '\n';

  RunManifest m;
  m.command = "evaluate";
  m.config = {{"split", options.split}};
  m.seed = t.seed;
  m.add_input(options.model);
  m.add_input(options.data / layout::kManifest);
  const fs::path path = options.manifest.value_or(
      options.model.parent_path() / ("evaluate_" + options.split + "_manifest.json"));
  m.output_dir = path.parent_path().string();
  m.results = {{acc_name, fmt(r.accuracy, "%.17g")},
               {ndcg_name, fmt(r.ndcg, "%.17g")},
               {"trips", std::to_string(trips.size())}};
  write_manifest(path, m);
  return 0;
}

int cmd_compare(const CompareOptions& options, std::ostream& out) {
  const PreparedData data = load_prepared(options.data);
  const auto rows = compare_models(data, options.models, options.split, resolve_threads(0));
  out << "model,accuracy_at_4,ndcg_at_40,p_value_vs_best\n";
  RunManifest m;
  m.command = "compare";
  m.config = {{"split", options.split}};
  m.add_input(options.data / layout::kManifest);
  for (const auto& row : rows) {
    out << row.name << ',' << fmt(row.result.accuracy) << ',' << fmt(row.result.ndcg) << ','
        << fmt(row.p_value, "%.6g") << '\n';
    if (fs::exists(row.name)) m.add_input(row.name);
    m.results[row.name + ".accuracy_at_4"] = fmt(row.result.accuracy, "%.17g");
    m.results[row.name + ".ndcg_at_40"] = fmt(row.result.ndcg, "%.17g");
    m.results[row.name + ".p_value"] = fmt(row.p_value, "%.17g");
  }
  const fs::path path =
      options.manifest.value_or(options.data / ("compare_" + options.split + "_manifest.json"));
  m.output_dir = path.parent_path().string();
  write_manifest(path, m);
  return 0;
}

int cmd_predict(const PredictOptions& options, std::ostream& out) {
  const nn::Checkpoint ckpt = nn::read_checkpoint(options.model);
  fs::path data_dir;
  if (options.data) {
    data_dir = *options.data;
  } else if (const auto it = ckpt.config.find("data_dir"); it != ckpt.config.end()) {
    data_dir = it->second;
  } else {
    throw InputError("checkpoint records no data directory; pass --data");
  }
  const PreparedData data = load_prepared(data_dir);
  const LoadedModel loaded = load_model(options.model, data);

  const bool inline_json = !options.trip.empty() && options.trip.front() == '[';
  const TripQuery query = parse_trip_json(inline_json ? options.trip : slurp(options.trip));
  std::vector<EncodedCheckin> prefix;
  for (const auto& c : query.prefix) prefix.push_back(encode(c, data.vocabs));
  const EncodedCheckin target = encode(query.target, data.vocabs);

  const FittedStats stats = fit_stats(data.train);
  const RankingInstance instance =
      build_instance(prefix, target, make_context(stats, data, loaded.config));
  if (instance.candidates.size() == 0) throw InputError("no candidates for this trip");
  const auto scores = loaded.model->predict(make_batch(std::span(&instance, 1)));
  const auto order = rank_order(scores.at(0));

  RunManifest m;
  m.command = "predict";
  m.config = {{"top", std::to_string(options.top)}, {"data_dir", data_dir.string()}};
  m.seed = loaded.config.train.seed;
  m.add_input(options.model);
  m.add_input(data_dir / layout::kManifest);
  if (!inline_json) m.add_input(options.trip);

  out << "rank,city_id,score\n";
  std::string top_list;
  for (std::size_t r = 0; r < std::min(options.top, order.size()); ++r) {
    const auto& cand = instance.candidates.candidates[order[r]];
    const std::string& city = data.vocabs.city.value_of(cand.city);
    out << r + 1 << ',' << city << ',' << fmt(scores[0][order[r]], "%.9g") << '\n';
    top_list += (r ? "," : "") + city;
  }
  m.results = {{"top", top_list}, {"candidates", std::to_string(instance.candidates.size())}};
  if (options.dump_candidates) {
    {
      std::ofstream dump(*options.dump_candidates, std::ios::binary);
      if (!dump) throw std::runtime_error("cannot write " + options.dump_candidates->string());
      write_candidates_csv(dump, instance.candidates, data.vocabs.city);
    }
    m.add_output(*options.dump_candidates);
  }
  const fs::path path =
      options.manifest.value_or(options.model.parent_path() / "predict_manifest.json");
  m.output_dir = path.parent_path().string();
  write_manifest(path, m);
  return 0;
}

}  // namespace triprank::cli
