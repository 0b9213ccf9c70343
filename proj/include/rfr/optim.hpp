#ifndef RFR_OPTIM_HPP
#define RFR_OPTIM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rfr/net.hpp"

namespace rfr {

/// p <- p - lr * grad for every parameter. Gradients are left as they are.
template <typename T>
void sgd_step(DenoiserNet<T>& net, double lr) {
  for (auto& view : net.parameters())
    for (std::size_t i = 0; i < view.value.size(); ++i)
      view.value[i] = static_cast<T>(view.value[i] - lr * view.grad[i]);
}

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamParams params;
  std::size_t t = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;

  AdamState() = default;
  AdamState(DenoiserNet<T>& net, AdamParams p) : params(p) {
    for (const auto& view : net.parameters()) {
      first_moment.emplace_back(view.value.size(), T(0));
      second_moment.emplace_back(view.value.size(), T(0));
    }
  }
};

/// One bias-corrected Adam update. Moments are kept in the parameter type.
template <typename T>
void adam_step(DenoiserNet<T>& net, AdamState<T>& state) {
  auto views = net.parameters();
  if (views.size() != state.first_moment.size())
    throw ShapeError("parameter arrays", state.first_moment.size(), views.size(), "adam_step");
  for (std::size_t k = 0; k < views.size(); ++k)
    if (views[k].value.size() != state.first_moment[k].size())
      throw ShapeError("parameter array " + std::to_string(k), state.first_moment[k].size(),
                       views[k].value.size(), "adam_step");

  const AdamParams& p = state.params;
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(p.beta1, t);
  const double c2 = 1.0 - std::pow(p.beta2, t);
  for (std::size_t k = 0; k < views.size(); ++k) {
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    auto value = views[k].value;
    auto grad = views[k].grad;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      const double mi = p.beta1 * m[i] + (1.0 - p.beta1) * g;
      const double vi = p.beta2 * v[i] + (1.0 - p.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      value[i] = static_cast<T>(value[i] - p.lr * (mi / c1) / (std::sqrt(vi / c2) + p.epsilon));
    }
  }
}

/// Cosine decay from `start` at step 0 to `end` at step total - 1.
inline double cosine_lr(std::size_t step, std::size_t total, double start, double end) {
  if (total <= 1) return start;
  const double progress = std::min(1.0, static_cast<double>(step) / static_cast<double>(total - 1));
  return end + 0.5 * (start - end) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace rfr

#endif  // RFR_OPTIM_HPP
