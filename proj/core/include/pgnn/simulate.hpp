#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pgnn/dataset.hpp"

namespace pgnn {

enum class RandomEffectLaw { Gamma, LogNormal, None };

enum class MeanModel {
  FiveFeature,  // 5 AR(1) features, cos/rational mean
  HighDim100,   // 100 iid N(0,1) features, the first 10 genuine
};

struct SimConfig {
  std::size_t n = 1000;  // clusters
  std::size_t q = 10;    // observations per cluster
  std::size_t p = 5;
  double lambda = 0.0;   // var(u_i) for gamma; var(v_i) for lognormal
  RandomEffectLaw law = RandomEffectLaw::Gamma;
  MeanModel mean_model = MeanModel::FiveFeature;
  double rho = 0.5;      // AR(1) coefficient across the feature index
  std::uint64_t seed = 0;

  void validate() const;
};

// Named scenarios: g0, g05, g1, n05, n1 (five-feature) and highdim.
SimConfig scenario_config(const std::string& name);
const std::vector<std::string>& scenario_names();

// log mu^m(x) of the generating model.
double true_log_mean(std::span<const double> x, MeanModel model);

// Draws a dataset; true_u() holds the per-cluster u_i.
ClusteredDataset simulate(const SimConfig& cfg);

}  // namespace pgnn
