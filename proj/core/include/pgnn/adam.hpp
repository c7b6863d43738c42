#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pgnn/dense_net.hpp"

namespace pgnn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

// Adam with bias correction. Moment buffers are keyed by parameter name so
// that the trainable set may grow between phases (a block seen for the first
// time starts with zero moments).
class AdamState {
 public:
  explicit AdamState(AdamOptions options = {}) : options_(options) {}

  // Throws TrainingError naming the parameter when a gradient is not finite,
  // ShapeError when a block changes length.
  void step(std::span<const ParamRef> params);

  std::uint64_t step_count() const noexcept { return steps_; }
  const AdamOptions& options() const noexcept { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }

  struct Moments {
    std::vector<double> first;
    std::vector<double> second;
  };
  const Moments* moments(const std::string& name) const;

 private:
  AdamOptions options_;
  std::uint64_t steps_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace pgnn
