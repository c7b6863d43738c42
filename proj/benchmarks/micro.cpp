#include <benchmark/benchmark.h>

#include <numeric>

#include "pgnn/hlik.hpp"
#include "pgnn/model.hpp"
#include "pgnn/rng.hpp"
#include "pgnn/simulate.hpp"
#include "pgnn/sparsemax.hpp"
#include "pgnn/special.hpp"

using namespace pgnn;

static void BM_Sparsemax(benchmark::State& state) {
  Rng rng(1);
  std::vector<double> z(static_cast<std::size_t>(state.range(0)));
  for (auto& x : z) x = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(sparsemax(z));
}
BENCHMARK(BM_Sparsemax)->Arg(5)->Arg(20)->Arg(100);

static void BM_LogGamma(benchmark::State& state) {
  double x = 0.37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_gamma(x));
    x = x < 1e5 ? x * 1.7 : 0.37;
  }
}
BENCHMARK(BM_LogGamma);

namespace {

struct Fixture {
  ClusteredDataset data;
  PgModel model;
  std::vector<std::size_t> rows;
};

Fixture make_fixture(std::size_t batch, std::size_t heads) {
  SimConfig cfg = scenario_config(heads > 0 ? "highdim" : "g05");
  cfg.n = 100;
  Fixture f{simulate(cfg), {}, {}};
  Rng rng(2);
  ModelSpec spec;
  spec.input_width = f.data.feature_count();
  spec.attention_heads = heads;
  f.model = make_model(spec, f.data.cluster_labels(), rng);
  f.rows.resize(batch);
  std::iota(f.rows.begin(), f.rows.end(), 0);
  return f;
}

}  // namespace

static void BM_ForwardBackward(benchmark::State& state) {
  auto f = make_fixture(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    auto res = loss_batch(f.model, f.data, f.rows, f.data.aggregates(), true);
    benchmark::DoNotOptimize(res.value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBackward)->Args({32, 0})->Args({256, 0})->Args({32, 3});

static void BM_LossValue(benchmark::State& state) {
  auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 0);
  for (auto _ : state) {
    auto res = loss_batch(f.model, f.data, f.rows, f.data.aggregates(), false);
    benchmark::DoNotOptimize(res.value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossValue)->Arg(32)->Arg(256);

BENCHMARK_MAIN();
