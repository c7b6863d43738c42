#include <cstdio>
#include <fstream>
#include <iterator>
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "pgnn/error.hpp"
#include "pgnn/hlik.hpp"
#include "pgnn/re_infer.hpp"
#include "pgnn/simulate.hpp"
#include "pgnn/var_comp.hpp"

using namespace pgnn;

TEST_CASE("no dispersion gives lambda = 0") {
  const std::vector<double> u(5, 1.0), mu(5, 3.0);
  CHECK(mme(u, mu) == 0.0);
}

TEST_CASE("the MME solves its estimating equation") {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.index(40);
    std::vector<double> u(n), mu(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = rng.gamma(2.0, 2.0);
      mu[i] = rng.uniform(0.2, 30.0);
    }
    const double lam = mme(u, mu);
    double s = 0, sw = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s += (u[i] - 1) * (u[i] - 1) / n;
      sw += (u[i] - 1) * (u[i] - 1) / mu[i] / n;
    }
    CHECK(lam > 0.0);
    CHECK(std::abs(lam - s - sw / lam) < 1e-10 * std::max(1.0, lam));
  }
}

TEST_CASE("the MME is invariant to cluster order") {
  std::vector<double> u = {0.5, 1.2, 2.0, 0.9}, mu = {1.0, 4.0, 2.0, 9.0};
  const double a = mme(u, mu);
  std::reverse(u.begin(), u.end());
  std::reverse(mu.begin(), mu.end());
  CHECK(mme(u, mu) == doctest::Approx(a).epsilon(1e-15));
}

TEST_CASE("MME errors") {
  const std::vector<double> one = {1.2};
  CHECK_THROWS_AS(mme(one, one), DomainError);
  const std::vector<double> u = {1.2, 0.8}, mu = {1.0, 0.0};
  CHECK_THROWS_AS(mme(u, mu), DomainError);
}

TEST_CASE("the MME is consistent with oracle BUPs") {
  SimConfig cfg;
  cfg.n = 10000;
  cfg.q = 50;
  cfg.lambda = 0.5;
  cfg.seed = 2024;
  auto ds = simulate(cfg);
  std::vector<double> mu(cfg.n, 0.0);
  for (std::size_t r = 0; r < ds.size(); ++r) mu[ds.cluster(r)] += std::exp(true_log_mean(ds.x(r), cfg.mean_model));
  auto u = bup(cfg.lambda, ds.aggregates().count_sums, mu);
  CHECK(std::abs(mme(u, mu) - 0.5) < 0.05);
}

namespace {

ClusteredDataset underdispersed(std::size_t n) {
  // every cluster has exactly its mean: no between-cluster variation at all
  Matrix x(2 * n, 1);
  std::vector<std::size_t> cl(2 * n);
  std::vector<std::int64_t> y(2 * n, 2);
  for (std::size_t r = 0; r < 2 * n; ++r) cl[r] = r / 2;
  return ClusteredDataset(x, cl, y, n);
}

PgModel glm(const ClusteredDataset& ds, double eta, double lambda) {
  Rng rng(1);
  ModelSpec spec;
  spec.mode = ModelMode::PgGlm;
  spec.input_width = ds.feature_count();
  auto m = make_model(spec, ds.cluster_labels(), rng);
  for (auto& w : m.net.layers[0].weight.flat()) w = 0.0;
  m.net.output_bias() = eta;
  m.set_lambda(lambda);
  return m;
}

}  // namespace

TEST_CASE("no random-effect variance puts the MLE at the floor") {
  auto ds = underdispersed(20);
  auto m = glm(ds, std::log(2.0), 0.3);
  auto r = refine_lambda(m, ds);
  CHECK(r.at_floor);
  CHECK(r.lambda == kLambdaFloor);
}

TEST_CASE("the profile gradient is the derivative of the profile likelihood") {
  auto ds = fixture::tiny_dataset(8, 3, 2, 19);
  auto m = fixture::random_model(ModelMode::PgGlm, ds, 0.5, 19);
  for (double t : {-3.0, -0.5, 0.7}) {
    const double h = 1e-5;
    const double fd = (profile_lambda_loglik(m, ds, t + h) - profile_lambda_loglik(m, ds, t - h)) / (2 * h);
    CHECK(std::abs(fd - profile_lambda_gradient(m, ds, t)) < 1e-6 * std::max(1.0, std::abs(fd)));
    // and the profile is h at the BUP for that lambda, up to terms free of lambda
    auto a = m, b = m;
    a.log_lambda = t;
    b.log_lambda = t + 0.3;
    set_random_effects_to_bup(a, ds);
    set_random_effects_to_bup(b, ds);
    const double dh = h_total(b, ds) - h_total(a, ds);
    const double dp = profile_lambda_loglik(m, ds, t + 0.3) - profile_lambda_loglik(m, ds, t);
    CHECK(std::abs(dh - dp) < 1e-9);
  }
}

TEST_CASE("refine_lambda matches a dense grid search") {
  SimConfig cfg;
  cfg.n = 30;
  cfg.q = 4;
  cfg.lambda = 0.6;
  cfg.seed = 5;
  auto ds = simulate(cfg);
  auto m = fixture::random_model(ModelMode::PgGlm, ds, 0.1, 2);
  for (auto& w : m.net.layers[0].weight.flat()) w *= 0.3;
  auto r = refine_lambda(m, ds);
  CHECK(std::abs(r.gradient) < 1e-8);
  double best_t = -6.0, best = -INFINITY;
  for (int s = 0; s <= 8000; ++s) {
    const double t = -6.0 + 1e-3 * s;
    const double v = profile_lambda_loglik(m, ds, t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  CHECK(std::abs(std::log(r.lambda) - best_t) <= 1e-3);
  // the maximizer dominates the moment estimate, both in the profile and in h
  auto at_mle = m, at_mme = m;
  at_mle.set_lambda(r.lambda);
  set_random_effects_to_bup(at_mle, ds);
  std::vector<double> u(ds.cluster_count());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(at_mle.v[i]);
  at_mme.set_lambda(mme(u, cluster_mu_sums(m, ds)));
  set_random_effects_to_bup(at_mme, ds);
  CHECK(h_total(at_mle, ds) >= h_total(at_mme, ds));
}

TEST_CASE("lambda trace CSV") {
  LambdaTrace t = {{0, 0.1, "init"}, {1, 0.25, "mme"}, {2, 0.3, "newton-refine"}};
  const std::string path = "pgnn_lambda_trace_test.csv";
  write_lambda_trace_csv(t, path);
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all == "epoch,lambda,source\n0,0.1,init\n1,0.25,mme\n2,0.3,newton-refine\n");
  std::remove(path.c_str());
}
