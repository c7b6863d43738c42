#include "pgnn/adam.hpp"

#include <cmath>

#include "pgnn/error.hpp"

namespace pgnn {

void AdamState::step(std::span<const ParamRef> params) {
  for (const auto& p : params) {
    if (p.value.size() != p.grad.size()) {
      throw ShapeError("Adam: value/gradient length mismatch for " + p.name);
    }
    for (double g : p.grad) {
      if (!std::isfinite(g)) throw TrainingError("non-finite gradient", p.name);
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(options_.beta1, t);
  const double c2 = 1.0 - std::pow(options_.beta2, t);
  const double lr = options_.learning_rate;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double eps = options_.epsilon;
  for (const auto& p : params) {
    auto [it, inserted] = moments_.try_emplace(p.name);
    Moments& m = it->second;
    if (inserted) {
      m.first.assign(p.value.size(), 0.0);
      m.second.assign(p.value.size(), 0.0);
    } else if (m.first.size() != p.value.size()) {
      throw ShapeError("Adam: parameter block " + p.name + " changed length");
    }
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m.first[k] = b1 * m.first[k] + (1.0 - b1) * g;
      m.second[k] = b2 * m.second[k] + (1.0 - b2) * g * g;
      const double mhat = m.first[k] / c1;
      const double vhat = m.second[k] / c2;
      p.value[k] -= lr * p.lr_scale * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

const AdamState::Moments* AdamState::moments(const std::string& name) const {
  auto it = moments_.find(name);
  return it == moments_.end() ? nullptr : &it->second;
}

}  // namespace pgnn
