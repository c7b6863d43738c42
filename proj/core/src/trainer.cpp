#include "pgnn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "pgnn/adam.hpp"
#include "pgnn/csv.hpp"
#include "pgnn/error.hpp"
#include "pgnn/hlik.hpp"
#include "pgnn/rng.hpp"

namespace pgnn {

void TrainConfig::validate() const {
  if (train_epochs == 0) throw ConfigError("TrainConfig: train_epochs must be positive");
  if (batch_size == 0) throw ConfigError("TrainConfig: batch_size must be positive");
  if (early_stop_patience == 0) throw ConfigError("TrainConfig: patience must be at least 1");
  if (adjust_every == 0) throw ConfigError("TrainConfig: adjust_every must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("TrainConfig: learning_rate must be positive");
  if (!(random_effect_lr_scale > 0.0)) throw ConfigError("TrainConfig: random_effect_lr_scale must be positive");
  if (!(attention_lr_scale > 0.0)) throw ConfigError("TrainConfig: attention_lr_scale must be positive");
}

void TrainLog::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("TrainLog: cannot open '" + path + "'");
  out << "epoch,train_loss,valid_loss,lambda,epsilon,seconds\n";
  for (const auto& r : rows) {
    out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.valid_loss) << ','
        << format_double(r.lambda) << ',' << format_double(r.epsilon) << ',' << format_double(r.seconds) << '\n';
  }
}

StopDecision evaluate_stop(std::span<const double> valid_losses, std::size_t patience) {
  StopDecision d;
  if (valid_losses.empty()) return d;
  for (std::size_t k = 1; k < valid_losses.size(); ++k) {
    if (valid_losses[k] < valid_losses[d.best_index]) d.best_index = k;
  }
  d.stop = valid_losses.size() - 1 - d.best_index >= patience;
  return d;
}

namespace {

class EpochRunner {
 public:
  EpochRunner(PgModel& model, const ClusteredDataset& train, const TrainConfig& cfg)
      : model_(model), train_(train), cfg_(cfg), rng_(Rng(cfg.seed).derive(0x7EA1)),
        adam_(AdamOptions{cfg.learning_rate}) {
    order_.resize(train.size());
    std::iota(order_.begin(), order_.end(), 0);
  }

  // One pass over shuffled minibatches.
  void run(const TrainableSet& which, std::size_t epoch) {
    std::shuffle(order_.begin(), order_.end(), rng_);
    for (std::size_t start = 0, batch = 0; start < order_.size(); start += cfg_.batch_size, ++batch) {
      const std::size_t stop = std::min(order_.size(), start + cfg_.batch_size);
      std::span<const std::size_t> rows(order_.data() + start, stop - start);
      try {
        auto res = loss_batch(model_, train_, rows, train_.aggregates());
        if (!std::isfinite(res.value)) throw TrainingError("non-finite loss", "batch loss");
        auto refs = param_refs(model_, res.grad, which);
        for (auto& r : refs)
          if (r.name == "v") {
            r.lr_scale = cfg_.random_effect_lr_scale;
          } else if (r.name.rfind("attention.", 0) == 0) {
            r.lr_scale = cfg_.attention_lr_scale;
          }
        adam_.step(refs);
      } catch (const TrainingError& e) {
        throw TrainingError(e.what(), "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch));
      }
      model_.clamp_log_lambda();
    }
  }

 private:
  PgModel& model_;
  const ClusteredDataset& train_;
  const TrainConfig& cfg_;
  Rng rng_;
  AdamState adam_;
  std::vector<std::size_t> order_;
};

double mean_count(const ClusteredDataset& ds) {
  double s = 0.0;
  for (std::size_t r = 0; r < ds.size(); ++r) s += static_cast<double>(ds.y(r));
  return s / static_cast<double>(std::max<std::size_t>(1, ds.size()));
}

}  // namespace

FitResult fit(PgModel model, const ClusteredDataset& train, const ClusteredDataset& valid, const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  if (train.size() == 0) throw ConfigError("fit: empty training set");
  if (train.cluster_count() != model.cluster_count() || valid.cluster_count() != model.cluster_count()) {
    throw ConfigError("fit: train/valid cluster index space does not match the model");
  }
  if (train.feature_count() != model.input_width() || (valid.size() > 0 && valid.feature_count() != model.input_width())) {
    throw ConfigError("fit: feature width does not match the model");
  }
  const bool effects = has_cluster_effects(model.mode);
  const bool prior = has_variance_component(model.mode);
  if (effects) {
    for (std::size_t i = 0; i < train.cluster_count(); ++i) {
      if (train.cluster_size(i) == 0) {
        throw ConfigError("fit: cluster '" + train.cluster_labels()[i] + "' has no training observations");
      }
    }
  }
  if (cfg.init_output_bias) {
    const double m = mean_count(train);
    if (m > 0.0) model.net.output_bias() = std::log(m);
  }

  FitResult result;
  auto clock = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    if (!cfg.record_timing) return 0.0;
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(now - clock).count();
  };
  auto valid_loss = [&] { return valid.size() > 0 ? loss_value(model, valid, train.aggregates()) : 0.0; };
  auto train_loss = [&] { return loss_value(model, train, train.aggregates()); };

  result.lambda_trace.push_back({0, prior ? model.lambda() : 0.0, prior ? "init" : "none"});
  EpochRunner runner(model, train, cfg);
  std::size_t epoch = 0;

  // Pretraining: lambda comes from the moment estimator (or its own gradient
  // when mme_pretrain is off).
  if (prior) {
    for (std::size_t e = 0; e < cfg.pretrain_epochs; ++e) {
      ++epoch;
      clock = std::chrono::steady_clock::now();
      runner.run({true, true, !cfg.mme_pretrain}, epoch);
      AdjustmentReport adj;
      if (epoch % cfg.adjust_every == 0) adj = adjust(model);
      if (cfg.mme_pretrain) {
        std::vector<double> u(model.v.size());
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(model.v[i]);
        const auto mu = cluster_mu_sums(model, train);
        for (std::size_t i = 0; i < mu.size(); ++i) {
          if (!(mu[i] > 0.0) || !std::isfinite(mu[i])) {
            throw TrainingError("degenerate marginal mean", "epoch " + std::to_string(epoch) + ", cluster '" +
                                                                train.cluster_labels()[i] + "'");
          }
        }
        model.set_lambda(mme(u, mu));
      }
      result.lambda_trace.push_back({epoch, model.lambda(), cfg.mme_pretrain ? "mme" : "gradient"});
      result.log.rows.push_back({epoch, "pretrain", train_loss(), valid_loss(), model.lambda(), adj.epsilon, elapsed()});
    }
  }
  result.lambda_after_pretrain = prior ? model.lambda() : 0.0;

  std::vector<double> history;
  PgModel best = model;
  for (std::size_t e = 0; e < cfg.train_epochs; ++e) {
    ++epoch;
    clock = std::chrono::steady_clock::now();
    runner.run({true, true, true}, epoch);
    AdjustmentReport adj;
    if (prior && epoch % cfg.adjust_every == 0) adj = adjust(model);
    const double vl = valid_loss();
    if (prior) result.lambda_trace.push_back({epoch, model.lambda(), "gradient"});
    result.log.rows.push_back({epoch, "train", train_loss(), vl, prior ? model.lambda() : 0.0, adj.epsilon, elapsed()});
    if (!std::isfinite(vl)) throw TrainingError("non-finite validation loss", "epoch " + std::to_string(epoch));
    history.push_back(vl);
    const auto decision = evaluate_stop(history, cfg.early_stop_patience);
    if (decision.best_index + 1 == history.size()) {
      best = model;
      result.best_epoch = epoch;
    }
    if (valid.size() > 0 && decision.stop) {
      result.stopped_early = true;
      break;
    }
  }
  if (valid.size() == 0) {
    best = model;
    result.best_epoch = epoch;
  }
  result.model = std::move(best);

  if (prior && cfg.refine_lambda) {
    result.refine = refine_lambda(result.model, train);
    result.model.set_lambda(result.refine->lambda);
    result.lambda_trace.push_back({epoch + 1, result.model.lambda(), "newton-refine"});
  }
  return result;
}

}  // namespace pgnn
