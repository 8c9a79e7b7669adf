#include "coinfer/neuralnet.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace coinfer::nn {

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.weight.squaredNorm() + l.bias.squaredNorm();
  return s;
}

void Gradients::scale(double factor) {
  for (auto& l : layers) {
    l.weight *= factor;
    l.bias *= factor;
  }
}

void Gradients::add(const Gradients& other) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
}

Mlp::Mlp(std::vector<int> widths, std::uint64_t seed) : Mlp(zeros(std::move(widths))) {
  std::mt19937_64 rng(seed);
  for (auto& layer : layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major fill so the draw order does not depend on Eigen's storage.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    }
  }
}

Mlp Mlp::zeros(std::vector<int> widths) {
  if (widths.size() < 2) throw std::invalid_argument("an MLP needs at least input and output widths");
  for (int w : widths) {
    if (w < 1) throw std::invalid_argument("layer widths must be positive");
  }
  Mlp net;
  net.widths_ = std::move(widths);
  for (std::size_t i = 0; i + 1 < net.widths_.size(); ++i) {
    net.layers_.push_back({Matrix::Zero(net.widths_[i + 1], net.widths_[i]),
                           Vector::Zero(net.widths_[i + 1])});
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

void Mlp::check_input(Eigen::Index rows) const {
  if (layers_.empty()) throw std::logic_error("network has no layers");
  if (rows != widths_.front()) {
    throw std::invalid_argument("input width " + std::to_string(rows) + " does not match " +
                                std::to_string(widths_.front()));
  }
}

Vector Mlp::forward(const Vector& x) const {
  check_input(x.size());
  Vector a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Vector z = layers_[l].weight * a + layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Matrix Mlp::forward(const Matrix& batch) const {
  check_input(batch.rows());
  Matrix a = batch;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = layers_[l].weight * a;
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

ForwardTrace Mlp::forward_trace(const Matrix& batch) const {
  check_input(batch.rows());
  ForwardTrace trace;
  trace.inputs.reserve(layers_.size());
  trace.inputs.push_back(batch);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = layers_[l].weight * trace.inputs.back();
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) {
      trace.inputs.push_back(z.cwiseMax(0.0));
    } else {
      trace.output = std::move(z);
    }
  }
  return trace;
}

Gradients Mlp::backward(const ForwardTrace& trace, const Matrix& d_output) const {
  if (trace.inputs.size() != layers_.size()) {
    throw std::invalid_argument("forward trace does not belong to this network");
  }
  if (d_output.rows() != trace.output.rows() || d_output.cols() != trace.output.cols()) {
    throw std::invalid_argument("output gradient shape mismatch");
  }
  Gradients g;
  g.layers.resize(layers_.size());
  Matrix dz = d_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Matrix& a = trace.inputs[i];
    g.layers[i].weight.noalias() = dz * a.transpose();
    g.layers[i].bias = dz.rowwise().sum();
    if (i > 0) {
      Matrix da = layers_[i].weight.transpose() * dz;
      // ReLU: the unit passed gradient only where its output was positive.
      dz = (a.array() > 0.0).select(da, 0.0);
    }
  }
  return g;
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  }
  return g;
}

bool Mlp::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

void Mlp::soft_update(const Mlp& source, double tau) {
  if (source.widths_ != widths_) throw std::invalid_argument("soft update between different shapes");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].weight = (1.0 - tau) * layers_[i].weight + tau * source.layers_[i].weight;
    layers_[i].bias = (1.0 - tau) * layers_[i].bias + tau * source.layers_[i].bias;
  }
}

std::vector<double> Mlp::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

void Mlp::set_flat_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) throw std::invalid_argument("parameter count mismatch");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[k++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = values[k++];
  }
}

std::vector<double> Mlp::flatten(const Gradients& g) {
  std::vector<double> out;
  for (const auto& l : g.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json doc;
  doc["widths"] = widths_;
  doc["layers"] = nlohmann::json::array();
  for (const auto& l : layers_) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    }
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    doc["layers"].push_back({{"weight", std::move(w)}, {"bias", std::move(b)}});
  }
  return doc;
}

Mlp Mlp::from_json(const nlohmann::json& doc) {
  Mlp net = zeros(doc.at("widths").get<std::vector<int>>());
  const auto& jl = doc.at("layers");
  if (jl.size() != net.layers_.size()) throw std::invalid_argument("layer count mismatch in checkpoint");
  for (std::size_t i = 0; i < net.layers_.size(); ++i) {
    auto& l = net.layers_[i];
    const auto w = jl[i].at("weight").get<std::vector<double>>();
    const auto b = jl[i].at("bias").get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(l.weight.size()) ||
        b.size() != static_cast<std::size_t>(l.bias.size())) {
      throw std::invalid_argument("parameter shape mismatch in checkpoint layer " + std::to_string(i));
    }
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = w[k++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = b[static_cast<std::size_t>(r)];
  }
  if (!net.all_finite()) throw NonFiniteError("checkpoint contains non-finite parameters");
  return net;
}

bool Mlp::operator==(const Mlp& other) const {
  if (widths_ != other.widths_) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].weight != other.layers_[i].weight || layers_[i].bias != other.layers_[i].bias) {
      return false;
    }
  }
  return true;
}

Adam::Adam(const Mlp& net, AdamConfig config) : config_(config) {
  const Gradients zero = net.zero_gradients();
  m_ = zero.layers;
  v_ = zero.layers;
}

void Adam::step(Mlp& net, const Gradients& grads) {
  if (grads.layers.size() != m_.size()) throw std::invalid_argument("gradient/optimizer shape mismatch");
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& g = grads.layers[i];
    auto& m = m_[i];
    auto& v = v_[i];
    m.weight = b1 * m.weight + (1.0 - b1) * g.weight;
    v.weight = b2 * v.weight + (1.0 - b2) * g.weight.cwiseAbs2();
    m.bias = b1 * m.bias + (1.0 - b1) * g.bias;
    v.bias = b2 * v.bias + (1.0 - b2) * g.bias.cwiseAbs2();
    layers[i].weight.array() -=
        lr * (m.weight.array() / c1) / ((v.weight.array() / c2).sqrt() + eps);
    layers[i].bias.array() -= lr * (m.bias.array() / c1) / ((v.bias.array() / c2).sqrt() + eps);
  }
  if (!net.all_finite()) {
    throw NonFiniteError("non-finite parameters after optimizer step " + std::to_string(t_) +
                         " (gradient squared norm " + std::to_string(grads.squared_norm()) + ")");
  }
}

double ScalarAdam::step(double value, double grad) {
  ++t_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad * grad;
  const double mhat = m_ / (1.0 - std::pow(config_.beta1, static_cast<double>(t_)));
  const double vhat = v_ / (1.0 - std::pow(config_.beta2, static_cast<double>(t_)));
  const double next = value - config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
  if (!std::isfinite(next)) throw NonFiniteError("non-finite scalar parameter after optimizer step");
  return next;
}

Vector softmax(const Vector& logits) {
  if (logits.size() == 0) throw std::invalid_argument("softmax of an empty vector");
  const double mx = logits.maxCoeff();
  Vector e = (logits.array() - mx).exp();
  return e / e.sum();
}

Vector masked_log_softmax(const Vector& logits, std::span<const std::uint8_t> mask) {
  if (mask.size() != static_cast<std::size_t>(logits.size())) {
    throw std::invalid_argument("mask size does not match logits");
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) mx = std::max(mx, logits(i));
  }
  if (mx == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("masked softmax with every slot masked");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) sum += std::exp(logits(i) - mx);
  }
  const double lse = mx + std::log(sum);
  Vector out(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    out(i) = mask[static_cast<std::size_t>(i)] ? logits(i) - lse
                                               : -std::numeric_limits<double>::infinity();
  }
  return out;
}

Vector masked_softmax(const Vector& logits, std::span<const std::uint8_t> mask) {
  if (mask.size() != static_cast<std::size_t>(logits.size())) {
    throw std::invalid_argument("mask size does not match logits");
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) mx = std::max(mx, logits(i));
  }
  if (mx == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("masked softmax with every slot masked");
  }
  Vector out = Vector::Zero(logits.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) {
      out(i) = std::exp(logits(i) - mx);
      sum += out(i);
    }
  }
  return out / sum;
}

}  // namespace coinfer::nn
