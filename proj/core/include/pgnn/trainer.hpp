#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgnn/dataset.hpp"
#include "pgnn/model.hpp"
#include "pgnn/re_infer.hpp"
#include "pgnn/var_comp.hpp"

namespace pgnn {

struct TrainConfig {
  std::size_t pretrain_epochs = 20;
  std::size_t train_epochs = 200;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  double random_effect_lr_scale = 1.0;  // learning-rate multiplier for the v table
  double attention_lr_scale = 1.0;      // learning-rate multiplier for the attention block
  std::size_t early_stop_patience = 10;
  std::uint64_t seed = 0;
  std::size_t adjust_every = 1;   // epochs between random-effect adjustments
  bool mme_pretrain = true;       // false: lambda follows gradients during pretraining too
  bool refine_lambda = true;      // final profile MLE of lambda
  bool init_output_bias = true;   // start beta_0 at log(mean y) of the training rows
  bool record_timing = false;     // wall-clock seconds in the log (breaks byte-identical replays)

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based, counted across both phases
  std::string phase;      // "pretrain" or "train"
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;   // adjustment offset mean(u) - 1 seen this epoch
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> rows;
  void write_csv(const std::string& path) const;
};

struct StopDecision {
  bool stop = false;
  std::size_t best_index = 0;
};

// Stop once the best loss is `patience` or more entries old.
StopDecision evaluate_stop(std::span<const double> valid_losses, std::size_t patience);

struct FitResult {
  PgModel model;
  TrainLog log;
  LambdaTrace lambda_trace;
  std::size_t best_epoch = 0;
  double lambda_after_pretrain = 0.0;
  std::optional<RefineResult> refine;
  bool stopped_early = false;
};

// Pretraining (network and v, lambda from the moment estimator after each
// epoch), then training of every parameter with early stopping on the
// validation loss, restoration of the best epoch and the final profile MLE
// of lambda. Random effects are adjusted after every `adjust_every` epochs.
FitResult fit(PgModel model, const ClusteredDataset& train, const ClusteredDataset& valid,
              const TrainConfig& cfg);

}  // namespace pgnn
