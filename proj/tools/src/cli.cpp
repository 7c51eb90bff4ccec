#include "triprank/cli/cli.hpp"

#include <exception>

#include "CLI11.hpp"
#include "triprank/cli/commands.hpp"
#include "triprank/error.hpp"

namespace triprank::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"triprank: next-destination recommendation with candidate reranking"};
  app.require_subcommand(1);

  PrepareOptions prep;
  auto* prepare = app.add_subcommand("prepare", "Parse checkins, split trips, build vocabularies");
  prepare->add_option("--input", prep.input, "Checkin CSV")->required();
  prepare->add_option("--out", prep.out, "Output data directory")->required();
  prepare->add_option("--seed", prep.seed, "Split seed");
  prepare->add_option("--val", prep.n_val, "Validation trips");
  prepare->add_option("--holdout", prep.n_holdout, "Hold-out trips");
  prepare->add_flag("--camel-case", prep.camel_case, "Header uses userId/checkinDate/... names");

  SyntheticOptions synth_opts;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic checkin CSV");
  synth->add_option("--out", synth_out, "Output CSV")->required();
  synth->add_option("--trips", synth_opts.n_trips, "Number of trips");
  synth->add_option("--cities", synth_opts.n_cities, "Number of cities");
  synth->add_option("--countries", synth_opts.n_countries, "Number of countries");
  synth->add_option("--sharpness", synth_opts.transition_sharpness,
                    "Probability of the preferred successor city");
  synth->add_option("--seed", synth_opts.seed, "Generator seed");

  TrainOptions train_opts;
  auto* train = app.add_subcommand("train", "Train the reranker with early stopping");
  train->add_option("--data", train_opts.data, "Prepared data directory")->required();
  train->add_option("--config", train_opts.config, "Run config (key = value)")->required();
  train->add_option("--out", train_opts.out, "Run directory")->required();

  EvaluateOptions eval_opts;
  std::string eval_manifest;
  auto* evaluate = app.add_subcommand("evaluate", "Accuracy@4 and NDCG@40 of a checkpoint");
  evaluate->add_option("--data", eval_opts.data, "Prepared data directory")->required();
  evaluate->add_option("--model", eval_opts.model, "Checkpoint")->required();
  evaluate->add_option("--split", eval_opts.split, "train, validation or holdout");
  evaluate->add_option("--manifest", eval_manifest, "Where to write the run manifest");

  CompareOptions cmp_opts;
  std::string cmp_manifest;
  auto* compare = app.add_subcommand("compare", "Compare baselines and checkpoints");
  compare->add_option("--data", cmp_opts.data, "Prepared data directory")->required();
  compare->add_option("--models", cmp_opts.models,
                      "Comma-separated GlobalTop, LastCityCountryTop, TransitionChain or checkpoint paths")
      ->required()
      ->delimiter(',');
  compare->add_option("--split", cmp_opts.split, "train, validation or holdout");
  compare->add_option("--manifest", cmp_manifest, "Where to write the run manifest");

  PredictOptions pred_opts;
  std::string pred_data, pred_dump, pred_manifest;
  auto* predict = app.add_subcommand("predict", "Rank next cities for one trip");
  predict->add_option("--model", pred_opts.model, "Checkpoint")->required();
  predict->add_option("--trip", pred_opts.trip, "Trip JSON file or inline JSON array")->required();
  predict->add_option("--top", pred_opts.top, "Rows to print");
  predict->add_option("--data", pred_data, "Data directory (default: the one used for training)");
  predict->add_option("--dump-candidates", pred_dump, "Write the candidate pool as CSV");
  predict->add_option("--manifest", pred_manifest, "Where to write the run manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const auto optional_path = [](const std::string& s) -> std::optional<std::filesystem::path> {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
  };

  try {
    if (*synth) return cmd_synth(synth_opts, synth_out, out);
    if (*prepare) return cmd_prepare(prep, out);
    if (*train) return cmd_train(train_opts, out);
    if (*evaluate) {
      eval_opts.manifest = optional_path(eval_manifest);
      return cmd_evaluate(eval_opts, out);
    }
    if (*compare) {
      cmp_opts.manifest = optional_path(cmp_manifest);
      return cmd_compare(cmp_opts, out);
    }
    pred_opts.data = optional_path(pred_data);
    pred_opts.dump_candidates = optional_path(pred_dump);
    pred_opts.manifest = optional_path(pred_manifest);
    return cmd_predict(pred_opts, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace triprank::cli
