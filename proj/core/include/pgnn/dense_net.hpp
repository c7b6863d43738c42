#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pgnn {

class Rng;

// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Activation { LeakyRelu, Sigmoid, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
  Matrix weight;  // fan_in x fan_out
  std::vector<double> bias;
  Activation activation = Activation::Identity;

  std::size_t fan_in() const noexcept { return weight.rows(); }
  std::size_t fan_out() const noexcept { return weight.cols(); }

  bool operator==(const DenseLayer&) const = default;
};

// Feed-forward stack producing a scalar linear predictor. The last layer is
// the output layer: its weights are the beta_k on the last hidden nodes and
// its bias is beta_0.
struct DenseNet {
  std::vector<DenseLayer> layers;
  double leaky_slope = 0.01;

  std::size_t input_width() const;
  std::size_t hidden_layer_count() const { return layers.empty() ? 0 : layers.size() - 1; }
  std::size_t parameter_count() const;

  double& output_bias() { return layers.back().bias[0]; }
  double output_bias() const { return layers.back().bias[0]; }

  // Throws ShapeError / DomainError when the invariants are broken.
  void validate() const;

  bool operator==(const DenseNet&) const = default;
};

// Hidden layers of the given widths followed by a 1-unit identity output.
// Weights uniform on +-sqrt(6 / (fan_in + fan_out)), biases zero.
DenseNet make_mlp(std::size_t input_width, const std::vector<std::size_t>& hidden,
                  Activation hidden_activation, Rng& rng, double leaky_slope = 0.01);

// Gradient with the same layout as a DenseNet.
struct NetGradient {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;

  static NetGradient zeros_like(const DenseNet& net);
  void add_scaled(const NetGradient& other, double scale);
};

// Read-write view of one trainable parameter block and its gradient.
struct ParamRef {
  std::string name;
  std::span<double> value;
  std::span<const double> grad;
  double lr_scale = 1.0;  // multiplies the optimizer's learning rate for this block
};

void append_param_refs(DenseNet& net, const NetGradient& grad, const std::string& prefix,
                       std::vector<ParamRef>& out);

struct BackwardResult {
  NetGradient grad;
  Matrix input_grad;  // d(loss)/d(input), batch x input_width; empty unless requested
};

struct ForwardResult;

// Activations recorded by one batched forward pass. Holds a pointer to the
// network, which must outlive the tape and stay unmodified until backward().
class GradTape {
 public:
  GradTape() = default;

  bool empty() const noexcept { return net_ == nullptr; }
  std::size_t batch_size() const noexcept { return output_.size(); }
  std::span<const double> output() const noexcept { return output_; }

  // Recompute the forward pass from the recorded input.
  std::vector<double> replay() const;

  // Chain rule from d(loss)/d(output_b) for every row b of the batch.
  BackwardResult backward(std::span<const double> d_output, bool want_input_grad = false) const;

 private:
  friend ForwardResult forward(const DenseNet& net, const Matrix& x);

  const DenseNet* net_ = nullptr;
  std::vector<Matrix> inputs_;
  std::vector<Matrix> pre_;
  std::vector<double> output_;
};

struct ForwardResult {
  std::vector<double> eta;
  GradTape tape;
};

// Batched forward pass, one row of x per observation.
ForwardResult forward(const DenseNet& net, const Matrix& x);

// Single observation. Returns eta and the one-row tape.
std::pair<double, GradTape> forward(const DenseNet& net, std::span<const double> x);

// Forward without recording.
double evaluate(const DenseNet& net, std::span<const double> x);

}  // namespace pgnn
