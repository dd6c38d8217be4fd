#include "addml/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "addml/kernels.hpp"
#include "addml/rng.hpp"

namespace addml {

MetricNet::MetricNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidArchitecture("network needs at least one layer");
  for (std::size_t c = 0; c < layers_.size(); ++c) {
    const auto& layer = layers_[c];
    if (layer.fan_in() == 0 || layer.fan_out() == 0) {
      throw InvalidArchitecture("layer " + std::to_string(c) + " has a zero dimension");
    }
    if (layer.bias.size() != layer.fan_out()) {
      throw InvalidArchitecture("layer " + std::to_string(c) + " bias length mismatch");
    }
    if (c > 0 && layer.fan_in() != layers_[c - 1].fan_out()) {
      throw InvalidArchitecture("layer " + std::to_string(c) + " input does not match previous output");
    }
  }
}

std::vector<std::size_t> MetricNet::dims() const {
  std::vector<std::size_t> out;
  if (layers_.empty()) return out;
  out.push_back(input_dim());
  for (const auto& layer : layers_) out.push_back(layer.fan_out());
  return out;
}

std::size_t MetricNet::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.data().size() + layer.bias.size();
  return n;
}

bool MetricNet::all_finite() const noexcept {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(layers_.begin(), layers_.end(), [&](const DenseLayer& l) {
    return std::all_of(l.weight.data().begin(), l.weight.data().end(), finite) &&
           std::all_of(l.bias.begin(), l.bias.end(), finite);
  });
}

GradientSet GradientSet::zeros_like(const MetricNet& net) {
  GradientSet g;
  g.layers.reserve(net.depth());
  for (const auto& layer : net.layers()) {
    g.layers.push_back({Matrix(layer.fan_out(), layer.fan_in()), Vector(layer.fan_out(), 0.0)});
  }
  return g;
}

bool GradientSet::all_zero() const noexcept {
  auto zero = [](double v) { return v == 0.0; };
  return std::all_of(layers.begin(), layers.end(), [&](const DenseLayer& l) {
    return std::all_of(l.weight.data().begin(), l.weight.data().end(), zero) &&
           std::all_of(l.bias.begin(), l.bias.end(), zero);
  });
}

std::vector<std::size_t> architecture(std::size_t input_dim, std::span<const std::size_t> hidden,
                                      std::size_t metric_dim) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(metric_dim);
  return dims;
}

MetricNet init_glorot(std::span<const std::size_t> dims, std::uint64_t seed) {
  if (dims.size() < 2) throw InvalidArchitecture("need at least an input and an output dimension");
  if (std::any_of(dims.begin(), dims.end(), [](std::size_t v) { return v == 0; })) {
    throw InvalidArchitecture("layer dimensions must be positive");
  }
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  layers.reserve(dims.size() - 1);
  for (std::size_t c = 1; c < dims.size(); ++c) {
    const std::size_t fan_in = dims[c - 1];
    const std::size_t fan_out = dims[c];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer{Matrix(fan_out, fan_in), Vector(fan_out, 0.0)};
    for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
    layers.push_back(std::move(layer));
  }
  return MetricNet(std::move(layers));
}

namespace {

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
  }
}

// out = tanh(W * in + b)
void layer_forward(const DenseLayer& layer, std::span<const double> in, std::span<double> out) {
  for (std::size_t j = 0; j < layer.fan_out(); ++j) {
    out[j] = std::tanh(kernels::dot(layer.weight.row(j), in) + layer.bias[j]);
  }
}

// Activations of every layer for a batch; activations[0] is the input.
std::vector<Matrix> forward_trace(const MetricNet& net, const Matrix& x) {
  std::vector<Matrix> acts;
  acts.reserve(net.depth() + 1);
  acts.push_back(x);
  for (const auto& layer : net.layers()) {
    const Matrix& in = acts.back();
    Matrix out(in.rows(), layer.fan_out());
    for (std::size_t r = 0; r < in.rows(); ++r) layer_forward(layer, in.row(r), out.row(r));
    acts.push_back(std::move(out));
  }
  return acts;
}

void check_input(const MetricNet& net, std::size_t cols) {
  if (net.depth() == 0) throw InvalidArchitecture("empty network");
  if (cols != net.input_dim()) {
    throw ShapeError("input has " + std::to_string(cols) + " features, network expects " +
                     std::to_string(net.input_dim()));
  }
}

}  // namespace

Vector forward(const MetricNet& net, std::span<const double> x) {
  check_input(net, x.size());
  Vector current(x.begin(), x.end());
  Vector next;
  for (const auto& layer : net.layers()) {
    next.assign(layer.fan_out(), 0.0);
    layer_forward(layer, current, next);
    current.swap(next);
  }
  return current;
}

Matrix forward_batch(const MetricNet& net, const Matrix& x) {
  if (x.rows() == 0) return Matrix(0, net.output_dim());
  check_input(net, x.cols());
  Matrix out(x.rows(), net.output_dim());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const Vector f = forward(net, x.row(r));
    std::copy(f.begin(), f.end(), out.row(r).begin());
  }
  return out;
}

GradientSet backward(const MetricNet& net, const Matrix& batch, const Matrix& upstream) {
  GradientSet grads = GradientSet::zeros_like(net);
  if (batch.rows() == 0 && upstream.rows() == 0) return grads;
  check_input(net, batch.cols());
  if (upstream.rows() != batch.rows() || upstream.cols() != net.output_dim()) {
    throw ShapeError("upstream gradient shape does not match batch x output_dim");
  }
  check_finite(upstream.data(), "upstream gradient");

  const std::vector<Matrix> acts = forward_trace(net, batch);
  const std::size_t depth = net.depth();
  Vector delta;
  Vector prev_delta;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto up = upstream.row(r);
    if (std::all_of(up.begin(), up.end(), [](double v) { return v == 0.0; })) continue;
    // dL/d(preactivation) of the top layer; tanh' = 1 - h^2.
    const auto top = acts[depth].row(r);
    delta.resize(top.size());
    for (std::size_t j = 0; j < top.size(); ++j) delta[j] = up[j] * (1.0 - top[j] * top[j]);

    for (std::size_t c = depth; c-- > 0;) {
      const DenseLayer& layer = net.layers()[c];
      DenseLayer& g = grads.layers[c];
      const auto h_in = acts[c].row(r);
      for (std::size_t j = 0; j < layer.fan_out(); ++j) {
        if (delta[j] == 0.0) continue;
        kernels::axpy(delta[j], h_in, g.weight.row(j));
        g.bias[j] += delta[j];
      }
      if (c == 0) break;
      prev_delta.assign(layer.fan_in(), 0.0);
      for (std::size_t j = 0; j < layer.fan_out(); ++j) {
        if (delta[j] != 0.0) kernels::axpy(delta[j], layer.weight.row(j), prev_delta);
      }
      for (std::size_t i = 0; i < prev_delta.size(); ++i) prev_delta[i] *= 1.0 - h_in[i] * h_in[i];
      delta.swap(prev_delta);
    }
  }
  return grads;
}

AdamState AdamState::for_net(const MetricNet& net, AdamConfig config) {
  return AdamState{config, 0, GradientSet::zeros_like(net), GradientSet::zeros_like(net)};
}

void adam_step(MetricNet& net, const GradientSet& grads, AdamState& state) {
  const std::size_t depth = net.depth();
  if (grads.layers.size() != depth || state.first_moment.layers.size() != depth ||
      state.second_moment.layers.size() != depth) {
    throw ShapeError("gradient/optimizer state depth does not match network");
  }
  for (std::size_t c = 0; c < depth; ++c) {
    const auto& p = net.layers()[c];
    const DenseLayer* others[] = {&grads.layers[c], &state.first_moment.layers[c], &state.second_moment.layers[c]};
    for (const DenseLayer* other : others) {
      if (other->weight.rows() != p.weight.rows() || other->weight.cols() != p.weight.cols() ||
          other->bias.size() != p.bias.size()) {
        throw ShapeError("gradient/optimizer state shape does not match layer " + std::to_string(c));
      }
    }
  }

  state.step += 1;
  const auto t = static_cast<double>(state.step);
  const kernels::AdamCoefficients coeff{state.config.learning_rate,
                                        state.config.beta1,
                                        state.config.beta2,
                                        state.config.epsilon,
                                        1.0 - std::pow(state.config.beta1, t),
                                        1.0 - std::pow(state.config.beta2, t)};
  for (std::size_t c = 0; c < depth; ++c) {
    DenseLayer& p = net.layers()[c];
    DenseLayer& m = state.first_moment.layers[c];
    DenseLayer& v = state.second_moment.layers[c];
    const DenseLayer& g = grads.layers[c];
    kernels::adam_update(p.weight.data(), m.weight.data(), v.weight.data(), g.weight.data(), coeff);
    kernels::adam_update(p.bias, m.bias, v.bias, g.bias, coeff);
  }
}

}  // namespace addml
