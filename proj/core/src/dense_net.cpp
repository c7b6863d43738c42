#include "pgnn/dense_net.hpp"

#include <cmath>

#include "pgnn/error.hpp"
#include "pgnn/rng.hpp"

namespace pgnn {

namespace {

double activate(Activation a, double z, double slope) {
  switch (a) {
    case Activation::LeakyRelu:
      return z > 0.0 ? z : slope * z;
    case Activation::Sigmoid:
      return 1.0 / (1.0 + std::exp(-z));
    case Activation::Identity:
      break;
  }
  return z;
}

double activate_derivative(Activation a, double z, double slope) {
  switch (a) {
    case Activation::LeakyRelu:
      return z > 0.0 ? 1.0 : slope;
    case Activation::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Activation::Identity:
      break;
  }
  return 1.0;
}

// out = act(in W + b); also stores the pre-activation.
void dense_forward(const DenseLayer& layer, double slope, const Matrix& in, Matrix& pre,
                   Matrix& out) {
  const std::size_t batch = in.rows();
  const std::size_t fan_in = layer.fan_in();
  const std::size_t fan_out = layer.fan_out();
  pre = Matrix(batch, fan_out);
  out = Matrix(batch, fan_out);
  for (std::size_t b = 0; b < batch; ++b) {
    auto acc = pre.row(b);
    for (std::size_t o = 0; o < fan_out; ++o) acc[o] = layer.bias[o];
    const auto x = in.row(b);
    for (std::size_t i = 0; i < fan_in; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const auto w = layer.weight.row(i);
      for (std::size_t o = 0; o < fan_out; ++o) acc[o] += xi * w[o];
    }
    auto y = out.row(b);
    for (std::size_t o = 0; o < fan_out; ++o) y[o] = activate(layer.activation, acc[o], slope);
  }
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::LeakyRelu:
      return "leaky-relu";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Identity:
      break;
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "leaky-relu") return Activation::LeakyRelu;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + s + "' (expected leaky-relu, sigmoid, identity)");
}

std::size_t DenseNet::input_width() const {
  return layers.empty() ? 0 : layers.front().fan_in();
}

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.flat().size() + l.bias.size();
  return n;
}

void DenseNet::validate() const {
  if (layers.empty()) throw ShapeError("DenseNet: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.fan_out()) {
      throw ShapeError("DenseNet: layer " + std::to_string(l) + " bias length mismatch");
    }
    if (l > 0 && layers[l - 1].fan_out() != layer.fan_in()) {
      throw ShapeError("DenseNet: layer " + std::to_string(l) + " fan_in does not chain");
    }
    for (double w : layer.weight.flat()) {
      if (!std::isfinite(w)) throw DomainError("DenseNet: non-finite weight in layer " + std::to_string(l));
    }
    for (double b : layer.bias) {
      if (!std::isfinite(b)) throw DomainError("DenseNet: non-finite bias in layer " + std::to_string(l));
    }
  }
  const auto& out = layers.back();
  if (out.fan_out() != 1 || out.activation != Activation::Identity) {
    throw ShapeError("DenseNet: output layer must be a single identity unit");
  }
}

DenseNet make_mlp(std::size_t input_width, const std::vector<std::size_t>& hidden,
                  Activation hidden_activation, Rng& rng, double leaky_slope) {
  if (input_width == 0) throw ShapeError("make_mlp: input width must be positive");
  DenseNet net;
  net.leaky_slope = leaky_slope;
  std::size_t fan_in = input_width;
  auto add = [&](std::size_t fan_out, Activation act) {
    DenseLayer layer;
    layer.weight = Matrix(fan_in, fan_out);
    layer.bias.assign(fan_out, 0.0);
    layer.activation = act;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : layer.weight.flat()) w = rng.uniform(-limit, limit);
    net.layers.push_back(std::move(layer));
    fan_in = fan_out;
  };
  for (std::size_t width : hidden) {
    if (width == 0) throw ShapeError("make_mlp: hidden width must be positive");
    add(width, hidden_activation);
  }
  add(1, Activation::Identity);
  return net;
}

NetGradient NetGradient::zeros_like(const DenseNet& net) {
  NetGradient g;
  g.weight.reserve(net.layers.size());
  g.bias.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    g.weight.emplace_back(l.fan_in(), l.fan_out());
    g.bias.emplace_back(l.fan_out(), 0.0);
  }
  return g;
}

void NetGradient::add_scaled(const NetGradient& other, double scale) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    auto dst = weight[l].flat();
    auto src = other.weight[l].flat();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
    for (std::size_t k = 0; k < bias[l].size(); ++k) bias[l][k] += scale * other.bias[l][k];
  }
}

void append_param_refs(DenseNet& net, const NetGradient& grad, const std::string& prefix,
                       std::vector<ParamRef>& out) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const std::string base = prefix + "layer" + std::to_string(l);
    out.push_back({base + ".weight", net.layers[l].weight.flat(), grad.weight[l].flat()});
    out.push_back({base + ".bias", net.layers[l].bias, grad.bias[l]});
  }
}

ForwardResult forward(const DenseNet& net, const Matrix& x) {
  if (net.layers.empty()) throw ShapeError("forward: empty network");
  if (x.cols() != net.input_width()) {
    throw ShapeError("forward: input width " + std::to_string(x.cols()) + " does not match fan_in " +
                     std::to_string(net.input_width()));
  }
  ForwardResult result;
  GradTape& tape = result.tape;
  tape.net_ = &net;
  tape.inputs_.reserve(net.layers.size());
  tape.pre_.resize(net.layers.size());
  tape.inputs_.push_back(x);
  Matrix out;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    dense_forward(net.layers[l], net.leaky_slope, tape.inputs_[l], tape.pre_[l], out);
    if (l + 1 < net.layers.size()) tape.inputs_.push_back(std::move(out));
  }
  tape.output_.assign(out.flat().begin(), out.flat().end());
  result.eta = tape.output_;
  return result;
}

std::pair<double, GradTape> forward(const DenseNet& net, std::span<const double> x) {
  Matrix row(1, x.size());
  std::copy(x.begin(), x.end(), row.row(0).begin());
  auto r = forward(net, row);
  return {r.eta[0], std::move(r.tape)};
}

double evaluate(const DenseNet& net, std::span<const double> x) {
  if (x.size() != net.input_width()) throw ShapeError("evaluate: input width mismatch");
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (const auto& layer : net.layers) {
    next.assign(layer.bias.begin(), layer.bias.end());
    for (std::size_t i = 0; i < layer.fan_in(); ++i) {
      const double xi = cur[i];
      if (xi == 0.0) continue;
      const auto w = layer.weight.row(i);
      for (std::size_t o = 0; o < layer.fan_out(); ++o) next[o] += xi * w[o];
    }
    for (double& z : next) z = activate(layer.activation, z, net.leaky_slope);
    cur.swap(next);
  }
  return cur[0];
}

std::vector<double> GradTape::replay() const {
  if (empty()) throw UsageError("GradTape::replay: empty tape");
  Matrix pre;
  Matrix out;
  Matrix in = inputs_.front();
  for (const auto& layer : net_->layers) {
    dense_forward(layer, net_->leaky_slope, in, pre, out);
    in = std::move(out);
  }
  return {in.flat().begin(), in.flat().end()};
}

BackwardResult GradTape::backward(std::span<const double> d_output, bool want_input_grad) const {
  if (empty()) throw UsageError("GradTape::backward: empty tape");
  if (d_output.size() != batch_size()) throw ShapeError("GradTape::backward: upstream gradient length mismatch");

  const DenseNet& net = *net_;
  BackwardResult result;
  result.grad = NetGradient::zeros_like(net);
  const std::size_t batch = batch_size();

  Matrix delta(batch, 1);
  for (std::size_t b = 0; b < batch; ++b) delta(b, 0) = d_output[b];

  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& layer = net.layers[l];
    const Matrix& pre = pre_[l];
    const Matrix& in = inputs_[l];
    const std::size_t fan_in = layer.fan_in();
    const std::size_t fan_out = layer.fan_out();
    if (layer.activation != Activation::Identity) {
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < fan_out; ++o) {
          delta(b, o) *= activate_derivative(layer.activation, pre(b, o), net.leaky_slope);
        }
      }
    }
    Matrix& dw = result.grad.weight[l];
    auto& db = result.grad.bias[l];
    for (std::size_t b = 0; b < batch; ++b) {
      const auto d = delta.row(b);
      const auto x = in.row(b);
      for (std::size_t o = 0; o < fan_out; ++o) db[o] += d[o];
      for (std::size_t i = 0; i < fan_in; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        auto g = dw.row(i);
        for (std::size_t o = 0; o < fan_out; ++o) g[o] += xi * d[o];
      }
    }
    if (l == 0 && !want_input_grad) break;
    Matrix prev(batch, fan_in);
    for (std::size_t b = 0; b < batch; ++b) {
      const auto d = delta.row(b);
      auto p = prev.row(b);
      for (std::size_t i = 0; i < fan_in; ++i) {
        const auto w = layer.weight.row(i);
        double acc = 0.0;
        for (std::size_t o = 0; o < fan_out; ++o) acc += w[o] * d[o];
        p[i] = acc;
      }
    }
    delta = std::move(prev);
  }
  if (want_input_grad) result.input_grad = std::move(delta);
  return result;
}

}  // namespace pgnn
