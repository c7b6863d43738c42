#include "pgnn/benchmark_runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "pgnn/csv.hpp"
#include "pgnn/error.hpp"
#include "pgnn/rng.hpp"

namespace pgnn {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double parse_variance(const std::string& digits, const std::string& name) {
  if (digits.empty()) throw UsageError("unknown scenario '" + name + "'");
  for (char c : digits)
    if (c < '0' || c > '9') throw UsageError("unknown scenario '" + name + "'");
  if (digits.size() > 1 && digits[0] == '0') return std::stod("0." + digits.substr(1));
  return std::stod(digits);
}

}  // namespace

BenchmarkScenario benchmark_scenario(const std::string& name, std::size_t n) {
  const auto bad = [&] { return UsageError("unknown scenario '" + name +
                                           "' (expected g<var> or n<var>, optional -q<k>)"); };
  if (name.size() < 2) throw bad();
  std::string base = name;
  std::size_t q_train = 0;
  if (const auto dash = name.find("-q"); dash != std::string::npos) {
    base = name.substr(0, dash);
    const std::string k = name.substr(dash + 2);
    if (k.empty() || k.find_first_not_of("0123456789") != std::string::npos) throw bad();
    q_train = std::stoul(k);
    if (q_train == 0) throw bad();
  }
  BenchmarkScenario sc;
  sc.name = name;
  if (base[0] == 'g') {
    sc.sim.law = RandomEffectLaw::Gamma;
  } else if (base[0] == 'n') {
    sc.sim.law = RandomEffectLaw::LogNormal;
  } else {
    throw bad();
  }
  sc.sim.lambda = parse_variance(base.substr(1), name);
  if (sc.sim.lambda == 0.0) sc.sim.law = RandomEffectLaw::Gamma;
  sc.sim.n = n;
  sc.sim.p = 5;
  sc.sim.mean_model = MeanModel::FiveFeature;
  if (q_train == 0) {
    sc.sim.q = 10;
    sc.split = SplitScheme::counts(6, 2, 2);
  } else {
    sc.sim.q = q_train + 4;
    sc.split = SplitScheme::counts(q_train, 2, 2);
  }
  sc.sim.validate();
  return sc;
}

TrainConfig benchmark_train_config() {
  TrainConfig t;
  t.pretrain_epochs = 20;
  t.train_epochs = 200;
  t.batch_size = 32;
  t.learning_rate = 1e-3;
  t.random_effect_lr_scale = 10.0;
  t.early_stop_patience = 10;
  return t;
}

std::vector<RepResult> run_replication(const BenchmarkConfig& cfg, std::size_t scenario_index,
                                       std::size_t rep) {
  const BenchmarkScenario& sc = cfg.scenarios.at(scenario_index);
  const Rng master = Rng(cfg.seed).derive(fnv1a(sc.name)).derive(rep);
  std::vector<RepResult> out;
  SplitResult parts;
  std::string data_error;
  try {
    SimConfig sim = sc.sim;
    sim.seed = master.derive(0xDA7A).seed();
    parts = split(simulate(sim), sc.split);
  } catch (const std::exception& e) {
    data_error = e.what();
  }
  for (std::size_t m = 0; m < cfg.models.size(); ++m) {
    RepResult r;
    r.scenario = sc.name;
    r.model = cfg.models[m];
    r.rep = rep;
    if (!data_error.empty()) {
      r.error = data_error;
      out.push_back(std::move(r));
      continue;
    }
    try {
      const Rng run_rng = master.derive(0x30DE1 + static_cast<std::uint64_t>(cfg.models[m]));
      ModelSpec spec = cfg.spec;
      spec.mode = cfg.models[m];
      spec.input_width = parts.train.feature_count();
      Rng init = run_rng.derive(1);
      PgModel model = make_model(spec, parts.train.cluster_labels(), init);
      TrainConfig tc = cfg.train;
      tc.seed = run_rng.derive(2).seed();
      FitResult fitted = fit(std::move(model), parts.train, parts.valid, tc);
      r.rmspe = test_rmspe(fitted.model, parts.test);
      r.lambda = has_variance_component(r.model) ? fitted.model.lambda() : 0.0;
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, const BenchmarkProgress& progress) {
  if (cfg.scenarios.empty()) throw ConfigError("benchmark: no scenarios");
  if (cfg.models.empty()) throw ConfigError("benchmark: no models");
  if (cfg.reps == 0) throw ConfigError("benchmark: reps must be positive");
  cfg.train.validate();

  const std::size_t tasks = cfg.scenarios.size() * cfg.reps;
  std::vector<std::vector<RepResult>> slots(tasks);
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  const auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      slots[t] = run_replication(cfg, t / cfg.reps, t % cfg.reps);
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        for (const auto& r : slots[t]) progress(r);
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, tasks));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  BenchmarkReport report;
  for (auto& slot : slots)
    for (auto& r : slot) report.runs.push_back(std::move(r));
  for (const auto& sc : cfg.scenarios) {
    for (ModelMode m : cfg.models) {
      MetricReport mr;
      mr.scenario = sc.name;
      mr.model = to_string(m);
      for (const auto& r : report.runs) {
        if (r.scenario != sc.name || r.model != m) continue;
        if (r.ok) {
          mr.rmspe.push_back(r.rmspe);
        } else {
          ++mr.failures;
        }
      }
      mr.recompute();
      report.summary.push_back(std::move(mr));
    }
  }
  return report;
}

const MetricReport* BenchmarkReport::find(const std::string& scenario, ModelMode model) const {
  const std::string tag = to_string(model);
  for (const auto& m : summary)
    if (m.scenario == scenario && m.model == tag) return &m;
  return nullptr;
}

const RepResult* BenchmarkReport::run(const std::string& scenario, ModelMode model,
                                      std::size_t rep) const {
  for (const auto& r : runs)
    if (r.ok && r.scenario == scenario && r.model == model && r.rep == rep) return &r;
  return nullptr;
}

void BenchmarkReport::write_runs_csv(std::ostream& os) const {
  os << "scenario,model,rep,rmspe\n";
  for (const auto& r : runs) {
    os << r.scenario << ',' << to_string(r.model) << ',' << r.rep << ',';
    if (r.ok) {
      os << format_double(r.rmspe);
    } else {
      os << "nan";
    }
    os << '\n';
  }
}

void BenchmarkReport::write_summary_csv(std::ostream& os) const {
  os << "scenario,model,mean_rmspe,sd_rmspe\n";
  for (const auto& m : summary) {
    os << m.scenario << ',' << m.model << ',';
    if (m.rmspe.empty()) {
      os << "nan,nan\n";
    } else {
      os << format_double(m.mean) << ',' << format_double(m.sd) << '\n';
    }
  }
}

void BenchmarkReport::write_runs_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  write_runs_csv(os);
}

void BenchmarkReport::write_summary_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  write_summary_csv(os);
}

}  // namespace pgnn
