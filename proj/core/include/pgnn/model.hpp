#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgnn/attention.hpp"
#include "pgnn/dense_net.hpp"

namespace pgnn {

class Rng;

enum class ModelMode {
  PgNn,   // network + gamma random effects (h-likelihood)
  PfNn,   // network + fixed cluster effects (conditional likelihood)
  PNn,    // network, no cluster effects
  PgGlm,  // linear predictor + gamma random effects
  PGlm,   // linear predictor only
};

std::string to_string(ModelMode m);
ModelMode mode_from_string(const std::string& s);
const std::vector<std::string>& mode_names();

bool has_cluster_effects(ModelMode m);      // v_table is trained
bool has_variance_component(ModelMode m);   // gamma prior with lambda
bool is_linear(ModelMode m);                // no hidden layers

// Lower bound for lambda; below it lgamma(1/lambda) dominates the loss scale.
inline constexpr double kLambdaFloor = 1e-6;
inline const double kLogLambdaFloor = std::log(kLambdaFloor);

struct ModelSpec {
  ModelMode mode = ModelMode::PgNn;
  std::size_t input_width = 0;
  std::vector<std::size_t> hidden = {10, 10, 10};  // ignored for linear modes
  Activation activation = Activation::LeakyRelu;
  double leaky_slope = 0.01;
  std::size_t attention_heads = 0;  // 0 disables the attention block
  std::size_t attention_embed_dim = 4;
  double initial_lambda = 0.1;
};

// Poisson-gamma network: marginal head exp(NN(x)) times the per-cluster
// u_i = exp(v_i). The network's output bias is beta_0.
struct PgModel {
  ModelMode mode = ModelMode::PgNn;
  DenseNet net;
  std::optional<AttentionSelector> attention;
  std::vector<double> v;
  double log_lambda = std::log(0.1);
  std::vector<std::string> cluster_labels;

  double lambda() const { return std::exp(log_lambda); }
  // Clamps at the floor.
  void set_lambda(double lambda);
  void clamp_log_lambda();
  bool lambda_at_floor() const { return log_lambda <= kLogLambdaFloor; }

  std::size_t input_width() const;
  std::size_t cluster_count() const noexcept { return v.size(); }
  std::optional<std::size_t> find_cluster(const std::string& label) const;

  // Throws on shape or mode-invariant violations.
  void validate() const;

  bool operator==(const PgModel&) const = default;
};

PgModel make_model(const ModelSpec& spec, std::vector<std::string> cluster_labels, Rng& rng);

struct Prediction {
  double mu_m = 1.0;
  double mu_c = 1.0;
  double u_hat = 1.0;
  bool cluster_known = false;
};

// Unknown or absent cluster: u_hat = 1 (the prior mean).
Prediction predict(const PgModel& model, std::span<const double> x,
                   std::optional<std::size_t> cluster = std::nullopt);

// Linear predictor NN(x) for every row.
std::vector<double> linear_predictor(const PgModel& model, const Matrix& x);

struct ModelGradient {
  NetGradient net;
  std::optional<AttentionGradient> attention;
  std::vector<double> v;
  double log_lambda = 0.0;

  static ModelGradient zeros_like(const PgModel& model);
};

// Forward pass through the optional attention block and the network.
struct ModelForward {
  std::vector<double> eta;
  GradTape tape;
  std::optional<AttentionForward> attention;
  const Matrix* input = nullptr;
};

ModelForward model_forward(const PgModel& model, const Matrix& x);

// Fills grad.net (and grad.attention) from d(loss)/d(eta).
void model_backward(const PgModel& model, const ModelForward& fwd, std::span<const double> d_eta,
                    ModelGradient& grad);

struct TrainableSet {
  bool network = true;
  bool random_effects = true;
  bool log_lambda = true;
};

std::vector<ParamRef> param_refs(PgModel& model, const ModelGradient& grad, const TrainableSet& which);

}  // namespace pgnn
