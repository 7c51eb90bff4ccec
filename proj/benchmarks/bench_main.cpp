#include <benchmark/benchmark.h>

#include "triprank/candidates.hpp"
#include "triprank/instances.hpp"
#include "triprank/ltr.hpp"
#include "triprank/nn/model.hpp"
#include "triprank/random.hpp"

using namespace triprank;

namespace {

struct Corpus {
  Vocabs vocabs;
  std::vector<EncodedTrip> trips;
  FittedStats stats;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    SyntheticOptions opt;
    opt.n_trips = 20000;
    opt.n_cities = 2000;
    opt.n_countries = 40;
    opt.transition_sharpness = 0.5;
    Corpus out;
    const auto trips = assemble_trips(generate_synthetic(opt));
    out.vocabs = build_vocabs(trips);
    out.trips = encode(trips, out.vocabs);
    out.stats = fit_stats(out.trips);
    return out;
  }();
  return c;
}

void BM_LambdaGradients(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<double> scores(n), labels(n, 0.0);
  for (auto& s : scores) s = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < 4; ++i) labels[rng.below(n)] = 1.0 / static_cast<double>(1u << i);
  for (auto _ : state) benchmark::DoNotOptimize(lambdarank_gradients(scores, labels));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LambdaGradients)->Arg(50)->Arg(500);

void BM_FitStats(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(fit_stats(c.trips));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.trips.size()));
}
BENCHMARK(BM_FitStats)->Unit(benchmark::kMillisecond);

void BM_AssembleCandidates(benchmark::State& state) {
  const auto& c = corpus();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& trip = c.trips[i++ % c.trips.size()];
    const auto prefix = std::span(trip.checkins).first(trip.size() - 1);
    benchmark::DoNotOptimize(assemble_candidates(prefix, c.stats));
  }
}
BENCHMARK(BM_AssembleCandidates);

void BM_BuildInstance(benchmark::State& state) {
  const auto& c = corpus();
  InstanceContext ctx;
  ctx.stats = &c.stats;
  ctx.city_country = c.vocabs.city_country;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& trip = c.trips[i++ % c.trips.size()];
    const auto prefix = std::span(trip.checkins).first(trip.size() - 1);
    benchmark::DoNotOptimize(build_instance(prefix, trip.checkins.back(), ctx));
  }
}
BENCHMARK(BM_BuildInstance);

void BM_Forward(benchmark::State& state, bool with_backward) {
  const auto& c = corpus();
  InstanceContext ctx;
  ctx.stats = &c.stats;
  ctx.city_country = c.vocabs.city_country;
  ctx.candidates.limit = static_cast<std::size_t>(state.range(0));
  std::vector<RankingInstance> instances;
  for (std::size_t i = 0; i < 32; ++i) {
    const auto& trip = c.trips[i];
    instances.push_back(build_instance(std::span(trip.checkins).first(trip.size() - 1),
                                       trip.checkins.back(), ctx));
  }
  const nn::ModelBatch batch = make_batch(instances);
  nn::ModelConfig cfg;
  cfg.model_dim = 16;
  cfg.n_heads = 2;
  cfg.n_trip_blocks = 1;
  cfg.city_emb_dim = 8;
  cfg.country_emb_dim = 4;
  cfg.affiliate_emb_dim = 2;
  nn::RerankerModel model(cfg, {c.vocabs.city.size() + 1, c.vocabs.country.size() + 1,
                                c.vocabs.affiliate.size() + 1},
                          3);
  for (auto _ : state) {
    nn::Tape tape(with_backward);
    const nn::Var scores = model.forward(tape, batch);
    if (with_backward) tape.backward(nn::sum(scores));
    benchmark::DoNotOptimize(scores.value().data());
  }
  model.params().zero_grad();
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK_CAPTURE(BM_Forward, inference, false)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Forward, training, true)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
