#include <benchmark/benchmark.h>

#include "fedforest/exchange.hpp"
#include "fedforest/federation.hpp"
#include "fedforest/harness.hpp"
#include "fedforest/metrics.hpp"
#include "fedforest/stats.hpp"
#include "testing.hpp"

using namespace fedforest;

namespace {

const Dataset& bcd() {
  static const Dataset d = resolve_dataset({"bcd", FEDFOREST_BENCH_DATA_DIR, {}, {}, 0});
  return d;
}

}  // namespace

static void BM_FitTree(benchmark::State& state) {
  const Dataset d = testing::random_dataset(1, static_cast<std::size_t>(state.range(0)), 30, 5, 1.0);
  TreeParams p;
  for (auto _ : state) {
    ++p.seed;
    benchmark::DoNotOptimize(fit_tree(d, p));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitTree)->Arg(200)->Arg(1000)->Arg(5000);

static void BM_FitForestBcd(benchmark::State& state) {
  ForestParams p;
  p.n_trees = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(fit_forest(bcd(), p, ++seed, "s"));
}
BENCHMARK(BM_FitForestBcd)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_PredictForest(benchmark::State& state) {
  ForestParams p;
  p.n_trees = 100;
  const Forest f = fit_forest(bcd(), p, 1, "s");
  for (auto _ : state) benchmark::DoNotOptimize(predict_proba(f, bcd()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(bcd().sample_count()));
}
BENCHMARK(BM_PredictForest);

static void BM_TransferableFilter(benchmark::State& state) {
  Rng rng(2);
  const auto pool = testing::feature_pool(30);
  GlobalStore store;
  const auto sites = static_cast<std::size_t>(state.range(0));
  for (std::size_t s = 0; s < sites; ++s) {
    const std::string id = site_name(s);
    store.register_site(FeatureDictionary(id, {pool.begin(), pool.end()}));
    std::vector<TreePtr> trees;
    for (std::size_t i = 0; i < 100; ++i)
      trees.push_back(std::make_shared<const DecisionTree>(
          testing::random_tree(rng, pool, 6, id, make_tree_id(id, i))));
    store.commit(Forest(trees, {}, id));
  }
  const FeatureDictionary dict("probe", {pool.begin(), pool.begin() + 20});
  for (auto _ : state) benchmark::DoNotOptimize(transferable(store, dict));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sites * 100));
}
BENCHMARK(BM_TransferableFilter)->Arg(2)->Arg(16);

static void BM_SerializeForest(benchmark::State& state) {
  ForestParams p;
  const Forest f = fit_forest(bcd(), p, 3, "s");
  for (auto _ : state) benchmark::DoNotOptimize(serialize_forest(f));
}
BENCHMARK(BM_SerializeForest)->Unit(benchmark::kMillisecond);

static void BM_DeserializeForest(benchmark::State& state) {
  ForestParams p;
  const std::string doc = serialize_forest(fit_forest(bcd(), p, 3, "s"));
  for (auto _ : state) benchmark::DoNotOptimize(deserialize_forest(doc));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(doc.size()));
}
BENCHMARK(BM_DeserializeForest)->Unit(benchmark::kMillisecond);

static void BM_RocAuc(benchmark::State& state) {
  Rng rng(4);
  ScoredLabels s;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    s.scores.push_back(rng.uniform01());
    s.labels.push_back(static_cast<std::uint8_t>(rng.uniform_index(2)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);

static void BM_WilcoxonExact20(benchmark::State& state) {
  Rng rng(5);
  stats::PairedSample p;
  for (int i = 0; i < 20; ++i) {
    p.a.push_back(rng.uniform01());
    p.b.push_back(rng.uniform01());
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::wilcoxon_signed_rank(p));
}
BENCHMARK(BM_WilcoxonExact20);

static void BM_BootstrapCi(benchmark::State& state) {
  Rng rng(6);
  stats::PairedSample p;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    p.a.push_back(rng.uniform01());
    p.b.push_back(rng.uniform01());
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::mean_difference_ci(p, 5000, 1));
}
BENCHMARK(BM_BootstrapCi)->Arg(40)->Arg(320)->Unit(benchmark::kMillisecond);

static void BM_RunGroupBcd(benchmark::State& state) {
  ExperimentConfig c;
  c.dataset_id = "bcd";
  std::size_t repeat = 0;
  const auto sites = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_group(bcd(), c, sites, 0.3, repeat++));
}
BENCHMARK(BM_RunGroupBcd)->Arg(2)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
