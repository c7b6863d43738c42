#include "pgnn/model.hpp"

#include <algorithm>

#include "pgnn/error.hpp"
#include "pgnn/rng.hpp"

namespace pgnn {

std::string to_string(ModelMode m) {
  switch (m) {
    case ModelMode::PgNn:
      return "pg-nn";
    case ModelMode::PfNn:
      return "pf-nn";
    case ModelMode::PNn:
      return "p-nn";
    case ModelMode::PgGlm:
      return "pg-glm";
    case ModelMode::PGlm:
      break;
  }
  return "p-glm";
}

const std::vector<std::string>& mode_names() {
  static const std::vector<std::string> names = {"p-glm", "p-nn", "pf-nn", "pg-glm", "pg-nn"};
  return names;
}

ModelMode mode_from_string(const std::string& s) {
  if (s == "pg-nn") return ModelMode::PgNn;
  if (s == "pf-nn") return ModelMode::PfNn;
  if (s == "p-nn") return ModelMode::PNn;
  if (s == "pg-glm") return ModelMode::PgGlm;
  if (s == "p-glm") return ModelMode::PGlm;
  throw UsageError("unknown model mode '" + s + "' (valid: p-glm, p-nn, pf-nn, pg-glm, pg-nn)");
}

bool has_cluster_effects(ModelMode m) {
  return m == ModelMode::PgNn || m == ModelMode::PfNn || m == ModelMode::PgGlm;
}

bool has_variance_component(ModelMode m) { return m == ModelMode::PgNn || m == ModelMode::PgGlm; }

bool is_linear(ModelMode m) { return m == ModelMode::PgGlm || m == ModelMode::PGlm; }

void PgModel::set_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("set_lambda: lambda must be >= 0");
  log_lambda = std::log(std::max(lambda, kLambdaFloor));
}

void PgModel::clamp_log_lambda() { log_lambda = std::max(log_lambda, kLogLambdaFloor); }

std::size_t PgModel::input_width() const {
  return attention ? attention->feature_count() : net.input_width();
}

std::optional<std::size_t> PgModel::find_cluster(const std::string& label) const {
  auto it = std::find(cluster_labels.begin(), cluster_labels.end(), label);
  if (it == cluster_labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - cluster_labels.begin());
}

void PgModel::validate() const {
  net.validate();
  if (attention) {
    attention->validate();
    if (attention->feature_count() != net.input_width()) {
      throw ShapeError("PgModel: attention width does not match network input");
    }
  }
  if (cluster_labels.size() != v.size()) throw ShapeError("PgModel: one label per random effect required");
  if (is_linear(mode) && net.hidden_layer_count() != 0) {
    throw ShapeError("PgModel: linear modes have no hidden layers");
  }
  if (!has_cluster_effects(mode)) {
    for (double vi : v) {
      if (vi != 0.0) throw StateError("PgModel: mode " + to_string(mode) + " requires v = 0");
    }
  }
  for (double vi : v) {
    if (!std::isfinite(vi)) throw DomainError("PgModel: non-finite random effect");
  }
  if (!std::isfinite(log_lambda)) throw DomainError("PgModel: non-finite log_lambda");
}

PgModel make_model(const ModelSpec& spec, std::vector<std::string> cluster_labels, Rng& rng) {
  if (spec.input_width == 0) throw ConfigError("make_model: input width must be positive");
  PgModel m;
  m.mode = spec.mode;
  const std::vector<std::size_t> hidden = is_linear(spec.mode) ? std::vector<std::size_t>{} : spec.hidden;
  m.net = make_mlp(spec.input_width, hidden, spec.activation, rng, spec.leaky_slope);
  if (spec.attention_heads > 0) {
    m.attention = make_attention(spec.input_width, spec.attention_heads, rng, spec.attention_embed_dim);
  }
  m.v.assign(cluster_labels.size(), 0.0);
  m.cluster_labels = std::move(cluster_labels);
  m.set_lambda(spec.initial_lambda);
  m.validate();
  return m;
}

namespace {

double head(const PgModel& model, std::span<const double> x) {
  if (!model.attention) return evaluate(model.net, x);
  Matrix row(1, x.size());
  std::copy(x.begin(), x.end(), row.row(0).begin());
  const auto fwd = attention_forward(*model.attention, row);
  return evaluate(model.net, fwd.weighted.row(0));
}

}  // namespace

Prediction predict(const PgModel& model, std::span<const double> x, std::optional<std::size_t> cluster) {
  if (x.size() != model.input_width()) {
    throw ShapeError("predict: input width " + std::to_string(x.size()) + " does not match model width " +
                     std::to_string(model.input_width()));
  }
  Prediction p;
  p.mu_m = std::exp(head(model, x));
  p.cluster_known = cluster.has_value() && *cluster < model.v.size();
  p.u_hat = p.cluster_known ? std::exp(model.v[*cluster]) : 1.0;
  p.mu_c = p.mu_m * p.u_hat;
  return p;
}

std::vector<double> linear_predictor(const PgModel& model, const Matrix& x) {
  return model_forward(model, x).eta;
}

ModelGradient ModelGradient::zeros_like(const PgModel& model) {
  ModelGradient g;
  g.net = NetGradient::zeros_like(model.net);
  if (model.attention) g.attention = AttentionGradient::zeros_like(*model.attention);
  g.v.assign(model.v.size(), 0.0);
  return g;
}

ModelForward model_forward(const PgModel& model, const Matrix& x) {
  if (x.cols() != model.input_width()) throw ShapeError("model_forward: input width mismatch");
  ModelForward out;
  out.input = &x;
  if (model.attention) {
    out.attention = attention_forward(*model.attention, x);
    auto r = forward(model.net, out.attention->weighted);
    out.eta = std::move(r.eta);
    out.tape = std::move(r.tape);
  } else {
    auto r = forward(model.net, x);
    out.eta = std::move(r.eta);
    out.tape = std::move(r.tape);
  }
  return out;
}

void model_backward(const PgModel& model, const ModelForward& fwd, std::span<const double> d_eta,
                    ModelGradient& grad) {
  auto back = fwd.tape.backward(d_eta, model.attention.has_value());
  grad.net = std::move(back.grad);
  if (model.attention) {
    grad.attention = attention_backward(*model.attention, *fwd.input, *fwd.attention, back.input_grad);
  }
}

std::vector<ParamRef> param_refs(PgModel& model, const ModelGradient& grad, const TrainableSet& which) {
  std::vector<ParamRef> refs;
  if (which.network) {
    append_param_refs(model.net, grad.net, "net.", refs);
    if (model.attention) append_param_refs(*model.attention, *grad.attention, refs);
  }
  if (which.random_effects && has_cluster_effects(model.mode) && !model.v.empty()) {
    refs.push_back({"v", model.v, grad.v});
  }
  if (which.log_lambda && has_variance_component(model.mode)) {
    refs.push_back({"log_lambda", std::span<double>(&model.log_lambda, 1),
                    std::span<const double>(&grad.log_lambda, 1)});
  }
  return refs;
}

}  // namespace pgnn
