#ifndef RFR_NET_HPP
#define RFR_NET_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfr/image.hpp"
#include "rfr/tensor.hpp"

namespace rfr {

struct NetConfig {
  std::uint32_t depth = 8;
  std::uint32_t width = 32;
  std::uint32_t kernel = 3;
  std::uint32_t in_channels = 1;
  PaddingMode padding = PaddingMode::zero;
  bool residual = true;

  void validate() const {
    if (depth < 2) throw std::invalid_argument("NetConfig: depth must be >= 2");
    if (width < 1) throw std::invalid_argument("NetConfig: width must be >= 1");
    if (kernel % 2 == 0) throw std::invalid_argument("NetConfig: kernel must be odd");
    if (in_channels != 1 && in_channels != 3)
      throw std::invalid_argument("NetConfig: in_channels must be 1 or 3");
  }

  /// Pixels at each border whose output depends on padding.
  std::size_t receptive_margin() const noexcept { return depth * (kernel - 1) / 2; }

  bool operator==(const NetConfig&) const = default;
};

/// Activations kept by a training forward pass: the input of every layer and
/// the pre-activation output of every hidden layer.
template <typename T>
struct ForwardCache {
  std::vector<Tensor<T>> layer_inputs;
  std::vector<Tensor<T>> pre_activations;
};

/// Parameter value and gradient buffer pair, one per weight or bias array.
template <typename T>
struct ParamView {
  std::span<T> value;
  std::span<T> grad;
};

/// Fully convolutional conv/ReLU chain. With `residual` set the network
/// predicts the noise and the output is input - body(input).
template <typename T>
class DenoiserNet {
 public:
  DenoiserNet() = default;
  explicit DenoiserNet(const NetConfig& config) : config_(config) {
    config_.validate();
    layers_.reserve(config_.depth);
    for (std::uint32_t l = 0; l < config_.depth; ++l) {
      const std::size_t in = l == 0 ? config_.in_channels : config_.width;
      const std::size_t out = l + 1 == config_.depth ? config_.in_channels : config_.width;
      layers_.emplace_back(out, in, config_.kernel);
    }
  }

  const NetConfig& config() const noexcept { return config_; }
  std::vector<ConvParams<T>>& layers() noexcept { return layers_; }
  const std::vector<ConvParams<T>>& layers() const noexcept { return layers_; }

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
  }

  void zero_grad() {
    for (auto& l : layers_) l.zero_grad();
  }

  std::vector<ParamView<T>> parameters() {
    std::vector<ParamView<T>> views;
    views.reserve(layers_.size() * 2);
    for (auto& l : layers_) {
      views.push_back({l.weight, l.weight_grad});
      views.push_back({l.bias, l.bias_grad});
    }
    return views;
  }

  Tensor<T> forward(const Tensor<T>& input) const {
    check_input(input);
    Tensor<T> x = input;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      x = conv2d_forward(x, layers_[l], config_.padding);
      if (l + 1 < layers_.size()) x = relu_forward(x);
    }
    return finish(input, std::move(x));
  }

  Tensor<T> forward(const Tensor<T>& input, ForwardCache<T>& cache) const {
    check_input(input);
    cache.layer_inputs.clear();
    cache.pre_activations.clear();
    cache.layer_inputs.push_back(input);
    Tensor<T> x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      x = conv2d_forward(cache.layer_inputs.back(), layers_[l], config_.padding);
      if (l + 1 < layers_.size()) {
        cache.layer_inputs.push_back(relu_forward(x));
        cache.pre_activations.push_back(std::move(x));
      }
    }
    return finish(input, std::move(x));
  }

  /// Accumulates parameter gradients for d(loss)/d(output) = grad_out.
  void backward(const ForwardCache<T>& cache, const Tensor<T>& grad_out) {
    if (cache.layer_inputs.size() != layers_.size())
      throw std::logic_error("DenoiserNet::backward: cache does not match network");
    Tensor<T> g = grad_out;
    if (config_.residual)
      for (T& v : g.data()) v = -v;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      if (l + 1 < layers_.size()) g = relu_backward(cache.pre_activations[l], g);
      g = conv2d_backward(cache.layer_inputs[l], layers_[l], g, config_.padding, l > 0);
    }
  }

  template <typename U>
  DenoiserNet<U> cast() const {
    DenoiserNet<U> out(config_);
    for (std::size_t l = 0; l < layers_.size(); ++l) out.layers()[l] = layers_[l].template cast<U>();
    return out;
  }

 private:
  void check_input(const Tensor<T>& input) const {
    if (input.shape().c != config_.in_channels)
      throw ShapeError("c", config_.in_channels, input.shape().c, "DenoiserNet::forward");
  }

  Tensor<T> finish(const Tensor<T>& input, Tensor<T> body) const {
    if (!config_.residual) return body;
    auto in = input.data();
    auto out = body.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] - out[i];
    return body;
  }

  NetConfig config_;
  std::vector<ConvParams<T>> layers_;
};

/// He initialisation: weights ~ N(0, 2 / fan_in), biases zero.
template <typename T = float>
DenoiserNet<T> init_net(const NetConfig& config, std::uint64_t seed) {
  DenoiserNet<T> net(config);
  std::mt19937_64 rng(seed);
  for (auto& layer : net.layers()) {
    std::normal_distribution<double> normal(0.0,
                                            std::sqrt(2.0 / static_cast<double>(layer.fan_in())));
    for (T& w : layer.weight) w = static_cast<T>(normal(rng));
  }
  return net;
}

inline Image denoise(const DenoiserNet<float>& net, const Image& image) {
  return to_image(net.forward(to_tensor(image)));
}

}  // namespace rfr

#endif  // RFR_NET_HPP
