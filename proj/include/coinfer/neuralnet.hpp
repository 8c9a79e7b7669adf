#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace coinfer::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-layer parameter gradients, same shapes as the network's layers.
struct Gradients {
  std::vector<DenseLayer> layers;

  double squared_norm() const;
  void scale(double factor);
  void add(const Gradients& other);
};

// Activations recorded during a batched forward pass. inputs[l] is the input
// of layer l (post-ReLU for l > 0); samples are columns.
struct ForwardTrace {
  std::vector<Matrix> inputs;
  Matrix output;
};

// Fully connected network: affine layers with ReLU between them and raw
// outputs. widths = {in, hidden..., out}.
class Mlp {
 public:
  Mlp() = default;
  // He-style uniform init: W ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), b = 0.
  Mlp(std::vector<int> widths, std::uint64_t seed);
  static Mlp zeros(std::vector<int> widths);

  const std::vector<int>& widths() const { return widths_; }
  int input_size() const { return widths_.front(); }
  int output_size() const { return widths_.back(); }
  std::size_t num_layers() const { return layers_.size(); }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  Vector forward(const Vector& x) const;
  Matrix forward(const Matrix& batch) const;
  ForwardTrace forward_trace(const Matrix& batch) const;

  // Reverse-mode gradients of sum_j <d_output[:, j], output[:, j]>.
  Gradients backward(const ForwardTrace& trace, const Matrix& d_output) const;
  Gradients zero_gradients() const;

  bool all_finite() const;
  // this <- (1 - tau) * this + tau * source
  void soft_update(const Mlp& source, double tau);

  // Flat parameter view in layer order (weight row-major, then bias).
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> values);
  static std::vector<double> flatten(const Gradients& g);

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& doc);

  bool operator==(const Mlp& other) const;

 private:
  void check_input(Eigen::Index rows) const;

  std::vector<int> widths_;
  std::vector<DenseLayer> layers_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;
// p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, AdamConfig config);

  // Throws NonFiniteError if the update leaves any parameter non-finite.
  void step(Mlp& net, const Gradients& grads);
  long steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::vector<DenseLayer> m_;
  std::vector<DenseLayer> v_;
  long t_ = 0;
};

// Scalar Adam for a single parameter such as log(alpha).
class ScalarAdam {
 public:
  explicit ScalarAdam(AdamConfig config = {}) : config_(config) {}
  double step(double value, double grad);

 private:
  AdamConfig config_;
  double m_ = 0.0;
  double v_ = 0.0;
  long t_ = 0;
};

Vector softmax(const Vector& logits);
// Masked slots get probability exactly 0. Throws if every slot is masked.
Vector masked_softmax(const Vector& logits, std::span<const std::uint8_t> mask);
// log of masked_softmax; masked slots hold -infinity.
Vector masked_log_softmax(const Vector& logits, std::span<const std::uint8_t> mask);

}  // namespace coinfer::nn
