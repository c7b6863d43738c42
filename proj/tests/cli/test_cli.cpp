#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "pgnn/checkpoint.hpp"
#include "pgnn/csv.hpp"
#include "pgnn/error.hpp"
#include "pgnn/rng.hpp"
#include "pgnn_cli/cli.hpp"

namespace fs = std::filesystem;
using namespace pgnn;

namespace {

struct Sandbox {
  fs::path dir;
  explicit Sandbox(const std::string& name) : dir(fs::temp_directory_path() / ("pgnn_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run pgnn_run(std::vector<std::string> args) {
  args.insert(args.begin(), "pgnn");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> rows_of(const std::string& path) {
  std::istringstream in(slurp(path));
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(split_csv_line(line));
  return rows;
}

}  // namespace

TEST_CASE("simulate writes reproducible files") {
  Sandbox box("simulate");
  auto a = pgnn_run({"simulate", "--scenario", "g1", "--n", "100", "--q", "10", "--seed", "7", "--out", box / "a.csv"});
  REQUIRE(a.code == 0);
  auto b = pgnn_run({"simulate", "--scenario", "g1", "--n", "100", "--q", "10", "--seed", "7", "--out", box / "b.csv"});
  REQUIRE(b.code == 0);
  CHECK(rows_of(box / "a.csv").size() == 1001);
  CHECK(slurp(box / "a.csv") == slurp(box / "b.csv"));
  CHECK(slurp(box / "a_true_u.csv") == slurp(box / "b_true_u.csv"));
  CHECK(a.out.find("n=100 q=10") != std::string::npos);
  auto c = pgnn_run({"simulate", "--scenario", "g1", "--n", "100", "--seed", "8", "--out", box / "c.csv"});
  CHECK(slurp(box / "a.csv") != slurp(box / "c.csv"));
  CHECK(load_csv(box / "a.csv").size() == 1000);
}

TEST_CASE("simulate scenarios") {
  Sandbox box("scenarios");
  REQUIRE(pgnn_run({"simulate", "--scenario", "g0", "--n", "20", "--out", box / "g0.csv"}).code == 0);
  const auto u = rows_of(box / "g0_true_u.csv");
  CHECK(u[0] == std::vector<std::string>{"cluster_id", "true_u"});
  CHECK(u.size() == 21);
  for (std::size_t i = 1; i < u.size(); ++i) CHECK(u[i][1] == "1");
  REQUIRE(pgnn_run({"simulate", "--scenario", "highdim", "--n", "5", "--out", box / "hd.csv"}).code == 0);
  const auto hd = rows_of(box / "hd.csv");
  CHECK(hd[0].size() == 102);
  CHECK(hd[0][0] == "cluster_id");
  CHECK(hd[0][1] == "y");
  CHECK(hd[0][101] == "x100");
  auto bad = pgnn_run({"simulate", "--scenario", "g7"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("highdim") != std::string::npos);
  CHECK(pgnn_run({"simulate"}).code == 2);
  CHECK(pgnn_run({"frobnicate"}).code == 2);
}

TEST_CASE("train on g05 recovers lambda and is reproducible") {
  Sandbox box("train");
  REQUIRE(pgnn_run({"simulate", "--scenario", "g05", "--n", "300", "--seed", "1", "--out", box / "d.csv"}).code == 0);
  auto a = pgnn_run({"train", "--data", box / "d.csv", "--seed", "4", "--out-dir", box / "a"});
  REQUIRE(a.code == 0);
  const auto trace = rows_of(box / "a/lambda_trace.csv");
  CHECK(trace[0] == std::vector<std::string>{"epoch", "lambda", "source"});
  CHECK(trace[1][2] == "init");
  CHECK(trace.back()[2] == "newton-refine");
  const double lambda = std::stod(trace.back()[1]);
  CHECK(lambda >= 0.3);
  CHECK(lambda <= 0.7);
  CHECK(rows_of(box / "a/train_log.csv")[0] ==
        std::vector<std::string>{"epoch", "train_loss", "valid_loss", "lambda", "epsilon", "seconds"});

  REQUIRE(pgnn_run({"train", "--data", box / "d.csv", "--seed", "4", "--out-dir", box / "b"}).code == 0);
  for (const char* f : {"checkpoint.json", "train_log.csv", "lambda_trace.csv"}) {
    CHECK(slurp(box / (std::string("a/") + f)) == slurp(box / (std::string("b/") + f)));
  }

  REQUIRE(pgnn_run({"train", "--data", box / "d.csv", "--mode", "p-nn", "--out-dir", box / "p"}).code == 0);
  CHECK(slurp(box / "p/lambda_trace.csv") == "epoch,lambda,source\n0,0,none\n");
}

TEST_CASE("train with separate files and attention scores") {
  Sandbox box("train_files");
  REQUIRE(pgnn_run({"simulate", "--scenario", "highdim", "--n", "20", "--q", "6", "--out", box / "d.csv"}).code == 0);
  auto rows = rows_of(box / "d.csv");
  std::ofstream tr(box / "tr.csv"), va(box / "va.csv");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) line += (c ? "," : "") + rows[r][c];
    if (r == 0) {
      tr << line << '\n';
      va << line << '\n';
    } else {
      ((r - 1) % 6 < 4 ? tr : va) << line << '\n';
    }
  }
  tr.close();
  va.close();
  auto res = pgnn_run({"train", "--train", box / "tr.csv", "--valid", box / "va.csv", "--heads", "2", "--epochs", "3",
                       "--pretrain-epochs", "1", "--out-dir", box / "o"});
  REQUIRE(res.code == 0);
  const auto scores = rows_of(box / "o/attention_scores.csv");
  REQUIRE(scores.size() == 101);
  CHECK(scores[0] == std::vector<std::string>{"feature_index", "score"});
  double total = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    CHECK(scores[k][0] == std::to_string(k));
    total += std::stod(scores[k][1]);
  }
  CHECK(std::abs(total - 1.0) < 1e-9);
  CHECK(pgnn_run({"train", "--data", box / "d.csv", "--train", box / "tr.csv"}).code == 2);
}

TEST_CASE("predict matches the library and handles unseen clusters") {
  Sandbox box("predict");
  REQUIRE(pgnn_run({"simulate", "--scenario", "g1", "--n", "40", "--seed", "2", "--out", box / "d.csv"}).code == 0);
  REQUIRE(pgnn_run({"train", "--data", box / "d.csv", "--epochs", "5", "--pretrain-epochs", "2", "--out-dir", box / "o"})
              .code == 0);
  // rows of a new cluster appended to the training file
  {
    auto rows = rows_of(box / "d.csv");
    std::ofstream f(box / "with_new.csv");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::string line;
      for (std::size_t c = 0; c < rows[r].size(); ++c) line += (c ? "," : "") + rows[r][c];
      f << line << '\n';
    }
    f << "newcomer,3,0.1,0.2,0.3,0.4,0.5\nnewcomer,1,-0.1,0,0,0,1\n";
  }
  auto res = pgnn_run({"predict", "--checkpoint", box / "o/checkpoint.json", "--data", box / "with_new.csv", "--out",
                       box / "p.csv"});
  REQUIRE(res.code == 0);
  CHECK(res.out.find("unseen_cluster_rows=2") != std::string::npos);
  const auto pred = rows_of(box / "p.csv");
  CHECK(pred[0] == std::vector<std::string>{"cluster_id", "mu_m", "mu_c", "u_hat"});
  const auto model = checkpoint_load(box / "o/checkpoint.json");
  const auto data = load_csv(box / "d.csv");
  REQUIRE(pred.size() == data.size() + 3);

  std::map<std::string, double> ratio;
  for (std::size_t r = 1; r <= data.size(); ++r) {
    const double q = std::stod(pred[r][2]) / std::stod(pred[r][1]);
    auto [it, fresh] = ratio.emplace(pred[r][0], q);
    if (!fresh) CHECK(std::abs(it->second - q) < 1e-12 * q);
  }
  for (std::size_t r = data.size() + 1; r < pred.size(); ++r) {
    CHECK(pred[r][0] == "newcomer");
    CHECK(pred[r][1] == pred[r][2]);
    CHECK(pred[r][3] == "1");
  }
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const std::size_t r = rng.index(data.size());
    const auto p = predict(model, data.x(r), model.find_cluster(data.cluster_labels()[data.cluster(r)]));
    CHECK(std::abs(std::stod(pred[r + 1][1]) - p.mu_m) <= 1e-12 * p.mu_m);
    CHECK(std::abs(std::stod(pred[r + 1][2]) - p.mu_c) <= 1e-12 * p.mu_c);
    CHECK(std::abs(std::stod(pred[r + 1][3]) - p.u_hat) <= 1e-12 * p.u_hat);
  }

  // predictions without a y column
  {
    std::ofstream f(box / "noy.csv");
    f << "cluster_id,x1,x2,x3,x4,x5\n0,0,0,0,0,0\n";
  }
  CHECK(pgnn_run({"predict", "--checkpoint", box / "o/checkpoint.json", "--data", box / "noy.csv", "--out",
                  box / "p2.csv"}).code == 0);
  {
    std::ofstream f(box / "narrow.csv");
    f << "cluster_id,y,x1,x2\n0,1,0,0\n";
  }
  auto narrow = pgnn_run({"predict", "--checkpoint", box / "o/checkpoint.json", "--data", box / "narrow.csv"});
  CHECK(narrow.code == 3);
  CHECK(narrow.err.find("features") != std::string::npos);
  auto ev = pgnn_run({"evaluate", "--checkpoint", box / "o/checkpoint.json", "--data", box / "d.csv"});
  CHECK(ev.code == 0);
  CHECK(ev.out.find("rmspe=") != std::string::npos);
  CHECK(pgnn_run({"predict", "--checkpoint", box / "missing.json", "--data", box / "d.csv"}).code == 3);
}

TEST_CASE("config files") {
  Sandbox box("config");
  {
    std::ofstream f(box / "sim.cfg");
    f << "# desk run\nscenario = g05\nn = 12\nq = 4\nseed = 3\nout = " << (box / "from_cfg.csv") << "\n";
  }
  auto a = pgnn_run({"simulate", "--config", box / "sim.cfg"});
  REQUIRE(a.code == 0);
  CHECK(rows_of(box / "from_cfg.csv").size() == 49);
  auto b = pgnn_run({"simulate", "--config", box / "sim.cfg", "--n", "5"});
  REQUIRE(b.code == 0);
  CHECK(rows_of(box / "from_cfg.csv").size() == 21);
  {
    std::ofstream f(box / "bad.cfg");
    f << "scenario = g05\ncolour = blue\n";
  }
  CHECK(pgnn_run({"simulate", "--config", box / "bad.cfg"}).code == 2);
  {
    std::ofstream f(box / "dup.cfg");
    f << "n = 3\nn = 4\n";
  }
  CHECK(pgnn_run({"simulate", "--config", box / "dup.cfg"}).code == 2);
  CHECK(pgnn_run({"simulate", "--config", box / "absent.cfg"}).code == 2);
  {
    std::ofstream f(box / "train.cfg");
    f << "mode = pg-glm\nepochs = 2\npretrain-epochs = 1\nno-refine = true\nhidden = 3,3\n";
  }
  REQUIRE(pgnn_run({"train", "--config", box / "train.cfg", "--data", box / "from_cfg.csv", "--split", "last-one-out",
                    "--out-dir", box / "t"}).code == 0);
  const auto model = checkpoint_load(box / "t/checkpoint.json");
  CHECK(model.mode == ModelMode::PgGlm);
  CHECK(slurp(box / "t/lambda_trace.csv").find("newton-refine") == std::string::npos);
}

TEST_CASE("parse_config") {
  std::istringstream in("a = 1\n\n  b=two words  # note\n--c = x\n");
  auto kv = cli::parse_config(in, "mem");
  CHECK(kv.size() == 3);
  CHECK(kv["a"] == "1");
  CHECK(kv["b"] == "two words");
  CHECK(kv["c"] == "x");
  std::istringstream bad("just words\n");
  CHECK_THROWS_AS(cli::parse_config(bad, "mem"), UsageError);
}

TEST_CASE("numerical aborts have their own exit code") {
  Sandbox box("nan");
  {
    std::ofstream f(box / "huge.csv");
    f << "cluster_id,y,x1\n";
    for (int i = 0; i < 10; ++i) f << i % 2 << ',' << i % 3 << ",1e300\n";
  }
  auto res = pgnn_run({"train", "--data", box / "huge.csv", "--split", "3,1,1", "--out-dir", box / "o"});
  CHECK(res.code == 4);
  {
    std::ofstream f(box / "neg.csv");
    f << "cluster_id,y,x1\n0,-1,0\n";
  }
  CHECK(pgnn_run({"train", "--data", box / "neg.csv", "--out-dir", box / "o"}).code == 3);
  CHECK(pgnn_run({"train", "--data", box / "huge.csv", "--split", "3,1,1", "--lr", "-1", "--out-dir", box / "o"}).code == 2);
}

TEST_CASE("benchmark subcommand") {
  Sandbox box("bench");
  const std::vector<std::string> args = {"benchmark", "--scenarios", "g05", "--models", "p-nn,pg-nn", "--reps", "2",
                                         "--n", "50", "--threads", "2"};
  auto with_dir = [&](const std::string& d) {
    auto a = args;
    a.push_back("--out-dir");
    a.push_back(box / d);
    return a;
  };
  auto a = pgnn_run(with_dir("a"));
  REQUIRE(a.code == 0);
  auto b = pgnn_run(with_dir("b"));
  REQUIRE(b.code == 0);
  const auto summary = rows_of(box / "a/benchmark_summary.csv");
  CHECK(summary[0] == std::vector<std::string>{"scenario", "model", "mean_rmspe", "sd_rmspe"});
  CHECK(summary.size() == 3);
  CHECK(rows_of(box / "a/benchmark_runs.csv").size() == 5);
  CHECK(slurp(box / "a/benchmark_summary.csv") == slurp(box / "b/benchmark_summary.csv"));
  CHECK(slurp(box / "a/benchmark_runs.csv") == slurp(box / "b/benchmark_runs.csv"));
  CHECK(pgnn_run({"benchmark", "--scenarios", "z9", "--out-dir", box / "c"}).code == 2);
}
