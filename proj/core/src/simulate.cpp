#include "pgnn/simulate.hpp"

#include <cmath>

#include "pgnn/error.hpp"
#include "pgnn/rng.hpp"

namespace pgnn {

void SimConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("SimConfig: lambda must be >= 0");
  if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("SimConfig: rho must lie in (-1, 1)");
  if (n == 0 || q == 0) throw ConfigError("SimConfig: n and q must be positive");
  const std::size_t expected = mean_model == MeanModel::FiveFeature ? 5 : 100;
  if (p != expected) {
    throw ConfigError("SimConfig: mean model requires p = " + std::to_string(expected) + ", got " +
                      std::to_string(p));
  }
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"g0", "g05", "g1", "n05", "n1", "highdim"};
  return names;
}

SimConfig scenario_config(const std::string& name) {
  SimConfig cfg;
  if (name == "g0") {
    cfg.lambda = 0.0;
  } else if (name == "g05") {
    cfg.lambda = 0.5;
  } else if (name == "g1") {
    cfg.lambda = 1.0;
  } else if (name == "n05") {
    cfg.lambda = 0.5;
    cfg.law = RandomEffectLaw::LogNormal;
  } else if (name == "n1") {
    cfg.lambda = 1.0;
    cfg.law = RandomEffectLaw::LogNormal;
  } else if (name == "highdim") {
    // u ~ Gamma(2, 2), i.e. lambda = 1/2.
    cfg.lambda = 0.5;
    cfg.mean_model = MeanModel::HighDim100;
    cfg.p = 100;
    cfg.q = 20;
  } else {
    std::string valid;
    for (const auto& s : scenario_names()) valid += (valid.empty() ? "" : ", ") + s;
    throw UsageError("unknown scenario '" + name + "' (valid: " + valid + ")");
  }
  return cfg;
}

double true_log_mean(std::span<const double> x, MeanModel model) {
  double s = 1.0;
  if (model == MeanModel::FiveFeature) {
    if (x.size() < 5) throw ShapeError("true_log_mean: five-feature model needs 5 inputs");
    s += std::cos(x[0]) + std::cos(x[1]) + std::cos(x[2]);
    s += 1.0 / (x[3] * x[3] + 1.0) + 1.0 / (x[4] * x[4] + 1.0);
  } else {
    if (x.size() < 10) throw ShapeError("true_log_mean: high-dimensional model needs 10 genuine inputs");
    for (std::size_t k = 0; k < 6; ++k) s += std::cos(x[k]);
    for (std::size_t k = 6; k < 10; ++k) s += 1.0 / (x[k] * x[k] + 1.0);
  }
  return 0.2 * s;
}

ClusteredDataset simulate(const SimConfig& cfg) {
  cfg.validate();
  Rng root(cfg.seed);
  Rng effect_rng = root.split();
  Rng feature_rng = root.split();
  Rng count_rng = root.split();

  std::vector<double> u(cfg.n, 1.0);
  if (cfg.lambda > 0.0) {
    for (auto& ui : u) {
      switch (cfg.law) {
        case RandomEffectLaw::Gamma:
          ui = effect_rng.gamma(1.0 / cfg.lambda, 1.0 / cfg.lambda);
          break;
        case RandomEffectLaw::LogNormal:
          ui = std::exp(effect_rng.normal(0.0, std::sqrt(cfg.lambda)));
          break;
        case RandomEffectLaw::None:
          break;
      }
    }
  }

  const std::size_t rows = cfg.n * cfg.q;
  Matrix x(rows, cfg.p);
  std::vector<std::size_t> cluster(rows);
  std::vector<std::int64_t> y(rows);
  const double innovation = std::sqrt(1.0 - cfg.rho * cfg.rho);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (std::size_t j = 0; j < cfg.q; ++j) {
      const std::size_t r = i * cfg.q + j;
      auto xr = x.row(r);
      if (cfg.mean_model == MeanModel::FiveFeature) {
        xr[0] = feature_rng.normal();
        for (std::size_t k = 1; k < cfg.p; ++k) xr[k] = cfg.rho * xr[k - 1] + innovation * feature_rng.normal();
      } else {
        for (auto& v : xr) v = feature_rng.normal();
      }
      cluster[r] = i;
      y[r] = count_rng.poisson(u[i] * std::exp(true_log_mean(xr, cfg.mean_model)));
    }
  }
  ClusteredDataset ds(std::move(x), std::move(cluster), std::move(y), cfg.n);
  ds.set_true_u(std::move(u));
  return ds;
}

}  // namespace pgnn
