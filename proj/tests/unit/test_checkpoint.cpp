#include <filesystem>

#include "doctest.h"
#include "fixtures.hpp"
#include "pgnn/checkpoint.hpp"
#include "pgnn/error.hpp"
#include "pgnn/metrics.hpp"
#include "pgnn/simulate.hpp"
#include "pgnn/split.hpp"
#include "pgnn/trainer.hpp"

using namespace pgnn;

TEST_CASE("save and load reproduce predictions exactly") {
  auto ds = fixture::tiny_dataset(5, 3, 3, 12);
  for (auto mode : {ModelMode::PgNn, ModelMode::PfNn, ModelMode::PNn, ModelMode::PgGlm, ModelMode::PGlm}) {
    auto m = fixture::random_model(mode, ds, 0.37, 5, {4, 3}, mode == ModelMode::PgNn ? 3 : 0);
    auto back = checkpoint_from_string(checkpoint_to_string(m));
    CHECK(back == m);
    for (std::size_t r = 0; r < ds.size(); ++r) {
      const auto a = predict(m, ds.x(r), ds.cluster(r));
      const auto b = predict(back, ds.x(r), ds.cluster(r));
      CHECK(a.mu_c == b.mu_c);
      CHECK(a.mu_m == b.mu_m);
    }
  }
}

TEST_CASE("file round trip") {
  auto ds = fixture::tiny_dataset(3, 2, 2, 1);
  auto m = fixture::random_model(ModelMode::PgNn, ds, 0.8, 2);
  const auto path = std::filesystem::temp_directory_path() / "pgnn_ckpt_test.json";
  checkpoint_save(m, path.string());
  CHECK(checkpoint_load(path.string()) == m);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(checkpoint_load(path.string()), CheckpointError);
}

TEST_CASE("wrong schema tags and malformed documents are rejected") {
  auto ds = fixture::tiny_dataset(2, 2, 2, 1);
  auto text = checkpoint_to_string(fixture::random_model(ModelMode::PgNn, ds, 0.5, 1));
  auto pos = text.find(kCheckpointSchema);
  REQUIRE(pos != std::string::npos);
  auto wrong = text;
  wrong.replace(pos, std::string(kCheckpointSchema).size(), "pgnn.checkpoint/0");
  CHECK_THROWS_AS(checkpoint_from_string(wrong), CheckpointError);
  CHECK_THROWS_AS(checkpoint_from_string("{not json"), CheckpointError);
  CHECK_THROWS_AS(checkpoint_from_string("{}"), CheckpointError);
}

TEST_CASE("a trained model reproduces its test RMSPE after a round trip") {
  SimConfig cfg = scenario_config("g05");
  cfg.n = 60;
  cfg.seed = 3;
  auto parts = split(simulate(cfg), SplitScheme::counts(6, 2, 2));
  Rng rng(4);
  ModelSpec spec;
  spec.input_width = 5;
  TrainConfig tc;
  tc.pretrain_epochs = 3;
  tc.train_epochs = 5;
  tc.batch_size = 32;
  auto fitted = fit(make_model(spec, parts.train.cluster_labels(), rng), parts.train, parts.valid, tc);
  const double before = test_rmspe(fitted.model, parts.test);
  auto back = checkpoint_from_string(checkpoint_to_string(fitted.model));
  CHECK(std::abs(test_rmspe(back, parts.test) - before) < 1e-12);
}
