#include "pgnn_cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "CLI11.hpp"
#include "pgnn/attention.hpp"
#include "pgnn/benchmark_runner.hpp"
#include "pgnn/checkpoint.hpp"
#include "pgnn/csv.hpp"
#include "pgnn/error.hpp"
#include "pgnn/metrics.hpp"
#include "pgnn/rng.hpp"
#include "pgnn/simulate.hpp"
#include "pgnn/split.hpp"
#include "pgnn/trainer.hpp"

namespace pgnn::cli {

namespace fs = std::filesystem;

std::map<std::string, std::string> parse_config(std::istream& in, const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw UsageError(where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(where + ": empty key");
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (!kv.emplace(key, value).second) throw UsageError(where + ": duplicate key '" + key + "'");
  }
  return kv;
}

namespace {

ClusteredDataset reindex(const ClusteredDataset& data, const std::vector<std::string>& known, bool allow_unknown) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < known.size(); ++i) index.emplace(known[i], i);
  std::vector<std::string> labels = known;
  std::vector<std::size_t> remap(data.cluster_count());
  for (std::size_t i = 0; i < data.cluster_count(); ++i) {
    const std::string& label = data.cluster_labels()[i];
    auto it = index.find(label);
    if (it == index.end()) {
      if (!allow_unknown) throw ConfigError("cluster '" + label + "' does not appear in the training data");
      it = index.emplace(label, labels.size()).first;
      labels.push_back(label);
    }
    remap[i] = it->second;
  }
  std::vector<std::size_t> cluster(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) cluster[r] = remap[data.cluster(r)];
  std::vector<std::int64_t> counts(data.counts().begin(), data.counts().end());
  const std::size_t n = labels.size();
  return ClusteredDataset(data.features(), std::move(cluster), std::move(counts), n, std::move(labels),
                          data.feature_names());
}

}  // namespace

ClusteredDataset align_to_model(const ClusteredDataset& data, const PgModel& model) {
  return reindex(data, model.cluster_labels, true);
}

ClusteredDataset align_to_labels(const ClusteredDataset& data, const std::vector<std::string>& labels) {
  return reindex(data, labels, false);
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& x : items) s += (s.empty() ? "" : ", ") + x;
  return s;
}

void apply_config(CLI::App& sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  for (const auto& [key, value] : parse_config(in, path)) {
    if (key == "config") throw UsageError(path + ": 'config' cannot be set from a config file");
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError(path + ": unknown key '" + key + "' for '" + sub.get_name() + "'");
    }
    if (opt->count() > 0) continue;  // the command line wins
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError(path + ": bad value for '" + key + "': " + e.what());
    }
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir + "'");
}

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string default_true_u_path(const std::string& out) {
  fs::path p(out);
  return (p.parent_path() / (p.stem().string() + "_true_u.csv")).string();
}

ModelMode parse_mode(const std::string& s) {
  try {
    return mode_from_string(s);
  } catch (const Error&) {
    throw UsageError("unknown model mode '" + s + "' (valid: " + join(mode_names()) + ")");
  }
}

// Options shared by train and benchmark.
struct TrainArgs {
  std::vector<std::size_t> hidden = ModelSpec{}.hidden;
  std::size_t heads = 0;
  std::size_t embed_dim = 4;
  double lambda_init = ModelSpec{}.initial_lambda;
  TrainConfig train = benchmark_train_config();
  bool no_mme = false;
  bool no_refine = false;

  void add_to(CLI::App& app) {
    app.add_option("--hidden", hidden, "Hidden layer widths, comma separated")->delimiter(',');
    app.add_option("--heads", heads, "Attention heads (0 disables feature selection)");
    app.add_option("--embed-dim", embed_dim, "Attention token width");
    app.add_option("--lambda-init", lambda_init, "Initial variance component");
    app.add_option("--pretrain-epochs", train.pretrain_epochs, "Epochs with lambda from the moment estimator");
    app.add_option("--epochs", train.train_epochs, "Maximum training epochs after pretraining");
    app.add_option("--batch-size", train.batch_size, "Minibatch size");
    app.add_option("--lr", train.learning_rate, "Adam learning rate");
    app.add_option("--re-lr-scale", train.random_effect_lr_scale, "Learning-rate multiplier for the random effects");
    app.add_option("--attention-lr-scale", train.attention_lr_scale, "Learning-rate multiplier for attention");
    app.add_option("--patience", train.early_stop_patience, "Early-stopping patience in epochs");
    app.add_option("--adjust-every", train.adjust_every, "Epochs between random-effect adjustments");
    app.add_flag("--no-mme", no_mme, "Learn lambda by gradient during pretraining");
    app.add_flag("--no-refine", no_refine, "Skip the final profile MLE of lambda");
  }

  ModelSpec spec(ModelMode mode, std::size_t width) const {
    ModelSpec s;
    s.mode = mode;
    s.input_width = width;
    s.hidden = hidden;
    s.attention_heads = heads;
    s.attention_embed_dim = embed_dim;
    s.initial_lambda = lambda_init;
    return s;
  }

  TrainConfig config() const {
    TrainConfig t = train;
    t.mme_pretrain = !no_mme;
    t.refine_lambda = !no_refine;
    return t;
  }
};

struct SimulateCmd {
  std::string config;
  std::string scenario;
  std::optional<std::size_t> n;
  std::optional<std::size_t> q;
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  std::string out = "data.csv";
  std::string true_u_out;

  void add_to(CLI::App& app) {
    app.add_option("--config", config, "Flat key = value file; flags override it");
    app.add_option("--scenario", scenario, "g0, g05, g1, n05, n1 or highdim");
    app.add_option("--n", n, "Number of clusters");
    app.add_option("--q", q, "Observations per cluster");
    app.add_option("--lambda", lambda, "Random-effect variance (overrides the scenario)");
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--out", out, "Output CSV");
    app.add_option("--true-u-out", true_u_out, "Per-cluster true_u CSV (default: <out>_true_u.csv)");
  }

  int run(std::ostream& os) const {
    if (scenario.empty()) throw UsageError("simulate: --scenario is required (valid: " + join(scenario_names()) + ")");
    SimConfig cfg = scenario_config(scenario);
    if (n) cfg.n = *n;
    if (q) cfg.q = *q;
    if (lambda) cfg.lambda = *lambda;
    cfg.seed = seed;
    cfg.validate();
    const auto ds = simulate(cfg);
    write_csv(ds, out);
    const std::string u_path = true_u_out.empty() ? default_true_u_path(out) : true_u_out;
    write_true_u_csv(ds, u_path);
    os << "simulate: scenario=" << scenario << " n=" << cfg.n << " q=" << cfg.q << " p=" << cfg.p
       << " lambda=" << format_double(cfg.lambda) << " seed=" << seed << " rows=" << ds.size() << "\n"
       << "  wrote " << out << " and " << u_path << "\n";
    return kSuccess;
  }
};

struct TrainCmd {
  std::string config;
  std::string data;
  std::string split = "6,2,2";
  std::string train_path;
  std::string valid_path;
  std::string mode = "pg-nn";
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  TrainArgs args;

  void add_to(CLI::App& app) {
    app.add_option("--config", config, "Flat key = value file; flags override it");
    app.add_option("--data", data, "One CSV split by --split");
    app.add_option("--split", split, "'train,valid,test' rows per cluster, last-one-out or random-one:<seed>");
    app.add_option("--train", train_path, "Training CSV (instead of --data)");
    app.add_option("--valid", valid_path, "Validation CSV (with --train)");
    app.add_option("--mode", mode, "p-glm, p-nn, pf-nn, pg-glm or pg-nn");
    app.add_option("--seed", seed, "Random seed for initialization and minibatches");
    app.add_option("--out-dir", out_dir, "Directory for checkpoint.json, train_log.csv, lambda_trace.csv");
    args.add_to(app);
  }

  int run(std::ostream& os) const {
    const ModelMode m = parse_mode(mode);
    ClusteredDataset train, valid, test;
    if (!data.empty() == !train_path.empty()) throw UsageError("train: give exactly one of --data and --train");
    if (!data.empty()) {
      auto parts = pgnn::split(load_csv(data), SplitScheme::parse(split));
      train = std::move(parts.train);
      valid = std::move(parts.valid);
      test = std::move(parts.test);
    } else {
      train = load_csv(train_path);
      valid = valid_path.empty() ? train.subset({}) : align_to_labels(load_csv(valid_path), train.cluster_labels());
    }
    ensure_dir(out_dir);

    const Rng master(seed);
    Rng init = master.derive(1);
    PgModel model = make_model(args.spec(m, train.feature_count()), train.cluster_labels(), init);
    TrainConfig tc = args.config();
    tc.seed = master.derive(2).seed();
    const FitResult res = fit(std::move(model), train, valid, tc);

    checkpoint_save(res.model, in_dir(out_dir, "checkpoint.json"));
    res.log.write_csv(in_dir(out_dir, "train_log.csv"));
    write_lambda_trace_csv(res.lambda_trace, in_dir(out_dir, "lambda_trace.csv"));
    if (res.model.attention) {
      const auto scores = attention_scores(*res.model.attention, train.features());
      std::ofstream sc(in_dir(out_dir, "attention_scores.csv"), std::ios::binary);
      if (!sc) throw ConfigError("cannot write attention_scores.csv");
      sc << "feature_index,score\n";
      for (std::size_t k = 0; k < scores.size(); ++k) sc << k + 1 << ',' << format_double(scores[k]) << '\n';
    }

    os << "train: mode=" << mode << " rows=" << train.size() << " clusters=" << train.cluster_count()
       << " epochs=" << res.log.rows.size() << " best_epoch=" << res.best_epoch
       << (res.stopped_early ? " (early stop)" : "") << "\n";
    if (has_variance_component(m)) os << "  lambda=" << format_double(res.model.lambda()) << "\n";
    if (test.size() > 0) os << "  test_rmspe=" << format_double(test_rmspe(res.model, test)) << "\n";
    os << "  wrote " << in_dir(out_dir, "checkpoint.json") << "\n";
    return kSuccess;
  }
};

struct PredictCmd {
  std::string config;
  std::string checkpoint;
  std::string data;
  std::string out = "predictions.csv";

  void add_to(CLI::App& app) {
    app.add_option("--config", config, "Flat key = value file; flags override it");
    app.add_option("--checkpoint", checkpoint, "Model checkpoint");
    app.add_option("--data", data, "Input CSV (y optional)");
    app.add_option("--out", out, "Output CSV: cluster_id,mu_m,mu_c,u_hat");
  }

  int run(std::ostream& os) const {
    if (checkpoint.empty() || data.empty()) throw UsageError("predict: --checkpoint and --data are required");
    const PgModel model = checkpoint_load(checkpoint);
    const auto ds = align_to_model(load_csv(data, false), model);
    if (ds.feature_count() != model.input_width()) {
      throw ShapeError("predict: input has " + std::to_string(ds.feature_count()) + " features, checkpoint expects " +
                       std::to_string(model.input_width()));
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + out + "'");
    f << "cluster_id,mu_m,mu_c,u_hat\n";
    std::size_t unseen = 0;
    for (std::size_t r = 0; r < ds.size(); ++r) {
      const std::size_t i = ds.cluster(r);
      const bool known = i < model.cluster_count();
      const Prediction p = predict(model, ds.x(r), known ? std::optional<std::size_t>(i) : std::nullopt);
      if (!p.cluster_known) ++unseen;
      f << ds.cluster_labels()[i] << ',' << format_double(p.mu_m) << ',' << format_double(p.mu_c) << ','
        << format_double(p.u_hat) << '\n';
    }
    os << "predict: rows=" << ds.size() << " unseen_cluster_rows=" << unseen << " (u_hat = 1)\n"
       << "  wrote " << out << "\n";
    return kSuccess;
  }
};

struct EvaluateCmd {
  std::string config;
  std::string checkpoint;
  std::string data;

  void add_to(CLI::App& app) {
    app.add_option("--config", config, "Flat key = value file; flags override it");
    app.add_option("--checkpoint", checkpoint, "Model checkpoint");
    app.add_option("--data", data, "Labelled CSV");
  }

  int run(std::ostream& os) const {
    if (checkpoint.empty() || data.empty()) throw UsageError("evaluate: --checkpoint and --data are required");
    const PgModel model = checkpoint_load(checkpoint);
    const auto ds = align_to_model(load_csv(data), model);
    if (ds.feature_count() != model.input_width()) throw ShapeError("evaluate: feature width does not match the checkpoint");
    os << "evaluate: mode=" << to_string(model.mode) << " rows=" << ds.size()
       << " rmspe=" << format_double(test_rmspe(model, ds)) << "\n";
    return kSuccess;
  }
};

struct BenchmarkCmd {
  std::string config;
  std::vector<std::string> scenarios = {"g0", "g05", "g1", "n05", "n1"};
  std::vector<std::string> models = mode_names();
  std::optional<std::size_t> reps;
  std::optional<std::size_t> n;
  bool full = false;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out_dir = ".";
  TrainArgs args;

  void add_to(CLI::App& app) {
    app.add_option("--config", config, "Flat key = value file; flags override it");
    app.add_option("--scenarios", scenarios, "Comma separated, e.g. g05,g1 or g02-q1")->delimiter(',');
    app.add_option("--models", models, "Comma separated model modes")->delimiter(',');
    app.add_option("--reps", reps, "Replications per scenario (default 10, 100 with --full)");
    app.add_option("--n", n, "Clusters per replication (default 300, 1000 with --full)");
    app.add_flag("--full", full, "Full-scale settings: n = 1000 and 100 replications");
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--threads", threads, "Worker threads for replications");
    app.add_option("--out-dir", out_dir, "Directory for benchmark_runs.csv and benchmark_summary.csv");
    args.add_to(app);
  }

  int run(std::ostream& os) const {
    BenchmarkConfig cfg;
    const std::size_t clusters = n.value_or(full ? 1000 : 300);
    for (const auto& s : scenarios) cfg.scenarios.push_back(benchmark_scenario(s, clusters));
    cfg.models.clear();
    for (const auto& m : models) cfg.models.push_back(parse_mode(m));
    cfg.reps = reps.value_or(full ? 100 : 10);
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.spec = args.spec(ModelMode::PgNn, 0);
    cfg.train = args.config();
    ensure_dir(out_dir);

    std::size_t failures = 0;
    const auto report = run_benchmark(cfg, [&](const RepResult& r) {
      if (!r.ok) {
        ++failures;
        os << "  " << r.scenario << " " << to_string(r.model) << " rep " << r.rep << " failed: " << r.error << "\n";
      }
    });
    report.write_runs_csv(in_dir(out_dir, "benchmark_runs.csv"));
    report.write_summary_csv(in_dir(out_dir, "benchmark_summary.csv"));
    os << "benchmark: scenarios=" << cfg.scenarios.size() << " models=" << cfg.models.size() << " reps=" << cfg.reps
       << " n=" << clusters << " failed_runs=" << failures << "\n";
    for (const auto& s : report.summary) {
      os << "  " << s.scenario << " " << s.model << " mean_rmspe=" << format_double(s.mean)
         << " sd=" << format_double(s.sd) << " (" << s.rmspe.size() << " ok)\n";
    }
    return kSuccess;
  }
};

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e)) return kUsage;
  if (dynamic_cast<const TrainingError*>(&e) || dynamic_cast<const EstimationError*>(&e) ||
      dynamic_cast<const OracleError*>(&e)) {
    return kNumerical;
  }
  return kData;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Poisson-gamma neural networks for clustered count data", "pgnn");
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  SimulateCmd simulate_cmd;
  TrainCmd train_cmd;
  PredictCmd predict_cmd;
  EvaluateCmd evaluate_cmd;
  BenchmarkCmd benchmark_cmd;

  std::vector<std::pair<CLI::App*, std::function<int()>>> commands;
  auto add = [&](auto& cmd, const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    cmd.add_to(*sub);
    commands.emplace_back(sub, [&cmd, sub, &out] {
      apply_config(*sub, cmd.config);
      return cmd.run(out);
    });
  };
  add(simulate_cmd, "simulate", "Draw a clustered count dataset from a named scenario");
  add(train_cmd, "train", "Fit a model and write checkpoint, training log and lambda trace");
  add(predict_cmd, "predict", "Write mu_m, mu_c and u_hat for every row of a CSV");
  add(evaluate_cmd, "evaluate", "Report the RMSPE of a checkpoint on a labelled CSV");
  add(benchmark_cmd, "benchmark", "Run the simulation benchmark over scenarios and models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }
  try {
    for (auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn();
    }
    return kUsage;
  } catch (const std::exception& e) {
    err << "pgnn: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  for (const auto& a : args) argv.push_back(a.c_str());
  argv.push_back(nullptr);
  return run(static_cast<int>(args.size()), argv.data(), out, err);
}

}  // namespace pgnn::cli
