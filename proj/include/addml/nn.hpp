#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "addml/matrix.hpp"

namespace addml {

/// One tanh layer: h_out = tanh(weight * h_in + bias), weight is out x in.
struct DenseLayer {
  Matrix weight;
  Vector bias;

  std::size_t fan_in() const noexcept { return weight.cols(); }
  std::size_t fan_out() const noexcept { return weight.rows(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Stack of dense tanh layers mapping R^d into the open cube (-1, 1)^w.
class MetricNet {
 public:
  MetricNet() = default;
  /// Throws InvalidArchitecture when the layer shapes do not chain.
  explicit MetricNet(std::vector<DenseLayer> layers);

  std::size_t input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().fan_in(); }
  std::size_t output_dim() const noexcept { return layers_.empty() ? 0 : layers_.back().fan_out(); }
  std::size_t depth() const noexcept { return layers_.size(); }
  /// [d, v1, ..., w]
  std::vector<std::size_t> dims() const;
  std::size_t parameter_count() const noexcept;

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  bool all_finite() const noexcept;

  friend bool operator==(const MetricNet&, const MetricNet&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

/// Per-layer dL/dW and dL/db, shaped like the network.
struct GradientSet {
  std::vector<DenseLayer> layers;

  static GradientSet zeros_like(const MetricNet& net);
  bool all_zero() const noexcept;
};

/// Uniform Glorot weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
/// dims = [d, v1, ..., w]; needs at least two entries, all >= 1.
MetricNet init_glorot(std::span<const std::size_t> dims, std::uint64_t seed);

/// Builds the dims list [input_dim, hidden..., metric_dim].
std::vector<std::size_t> architecture(std::size_t input_dim, std::span<const std::size_t> hidden,
                                      std::size_t metric_dim);

Vector forward(const MetricNet& net, std::span<const double> x);
Matrix forward_batch(const MetricNet& net, const Matrix& x);

/// Gradients of a loss with respect to every parameter, given the loss
/// gradient with respect to each row's network output. Sums over rows.
GradientSet backward(const MetricNet& net, const Matrix& batch, const Matrix& upstream);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  GradientSet first_moment;
  GradientSet second_moment;

  static AdamState for_net(const MetricNet& net, AdamConfig config = {});
};

/// One bias-corrected Adam update of net in place; increments state.step.
void adam_step(MetricNet& net, const GradientSet& grads, AdamState& state);

}  // namespace addml
