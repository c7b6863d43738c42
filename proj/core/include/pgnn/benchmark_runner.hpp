#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pgnn/metrics.hpp"
#include "pgnn/model.hpp"
#include "pgnn/simulate.hpp"
#include "pgnn/split.hpp"
#include "pgnn/trainer.hpp"

namespace pgnn {

struct BenchmarkScenario {
  std::string name;
  SimConfig sim;       // seed is overwritten per replication
  SplitScheme split;
};

// "g0", "g05", "g1", "n05", "n1", optionally suffixed "-q<k>" for a
// cluster-size variant with k training rows per cluster plus 2 valid and 2
// test rows (q = k + 4). "g02" etc. select other gamma variances; the digits
// after the law letter read as "0.<rest>" when they start with 0.
BenchmarkScenario benchmark_scenario(const std::string& name, std::size_t n);

struct BenchmarkConfig {
  std::vector<BenchmarkScenario> scenarios;
  std::vector<ModelMode> models = {ModelMode::PGlm, ModelMode::PNn, ModelMode::PfNn,
                                   ModelMode::PgGlm, ModelMode::PgNn};
  std::size_t reps = 10;
  std::uint64_t seed = 0;
  ModelSpec spec;       // template; mode and input_width are filled per run
  TrainConfig train;    // template; seed is filled per run
  std::size_t threads = 1;
};

// Desk-scale training settings used by the benchmark and the acceptance
// suite.
TrainConfig benchmark_train_config();

struct RepResult {
  std::string scenario;
  ModelMode model = ModelMode::PgNn;
  std::size_t rep = 0;
  bool ok = false;
  double rmspe = 0.0;
  double lambda = 0.0;  // final lambda for modes with a variance component
  std::string error;
};

struct BenchmarkReport {
  std::vector<RepResult> runs;        // scenario-major, then rep, then model
  std::vector<MetricReport> summary;  // scenario-major, then model

  const MetricReport* find(const std::string& scenario, ModelMode model) const;
  // Successful run, or nullptr.
  const RepResult* run(const std::string& scenario, ModelMode model, std::size_t rep) const;

  void write_runs_csv(std::ostream& os) const;     // scenario,model,rep,rmspe
  void write_summary_csv(std::ostream& os) const;  // scenario,model,mean_rmspe,sd_rmspe
  void write_runs_csv(const std::string& path) const;
  void write_summary_csv(const std::string& path) const;
};

using BenchmarkProgress = std::function<void(const RepResult&)>;

// Every replication simulates one dataset shared by all models. Failed fits
// are recorded with their message and left out of the summary.
BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, const BenchmarkProgress& progress = {});

// One replication of one scenario for the given models (exposed for tests).
std::vector<RepResult> run_replication(const BenchmarkConfig& cfg, std::size_t scenario_index,
                                       std::size_t rep);

}  // namespace pgnn
