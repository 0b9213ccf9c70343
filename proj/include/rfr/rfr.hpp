#ifndef RFR_RFR_HPP
#define RFR_RFR_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "rfr/image.hpp"
#include "rfr/net.hpp"
#include "rfr/noise.hpp"
#include "rfr/optim.hpp"

namespace rfr {

enum class OptimizerKind : std::uint8_t { adam = 0, sgd = 1 };

struct FinetuneConfig {
  std::size_t iters = 40;
  double lr = 1e-5;
  LossKind loss = LossKind::l2;
  NoiseSpec noise = GaussianKnown{sigma_from_255(25.0)};
  bool augment = true;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;

  void validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("FinetuneConfig: lr must be > 0");
    rfr::validate(noise);
  }
};

/// The fixed fine-tuning target: the baseline network's restoration of the
/// noisy input. Identical to denoise().
inline Image pseudo_clean(const DenoiserNet<float>& net, const Image& noisy) {
  return denoise(net, noisy);
}

/// One training sample built from the pseudo-clean image: draws a grid
/// symmetry (when augmenting), then fresh noise on the transformed target.
struct SyntheticPair {
  Image input;
  Image target;
  Dihedral transform = Dihedral::identity;
};

inline SyntheticPair synthesize_pair(const Image& x_tilde, const FinetuneConfig& cfg, Rng& rng) {
  SyntheticPair pair;
  if (cfg.augment) {
    std::uniform_int_distribution<unsigned> pick(0, kDihedralCount - 1);
    pair.transform = static_cast<Dihedral>(pick(rng));
  }
  pair.target = apply(pair.transform, x_tilde);
  // Raw-space synthesis needs a target inside the CRF domain.
  if (std::holds_alternative<Isp>(cfg.noise)) pair.target = clamp01(std::move(pair.target));
  pair.input = add_noise(pair.target, cfg.noise, rng);
  return pair;
}

/// Computes loss(f(T(x~) + N), T(x~)) and accumulates its parameter gradients
/// into `net`. The caller zeroes gradients beforehand.
inline double rfr_loss_step(DenoiserNet<float>& net, const Image& x_tilde,
                            const FinetuneConfig& cfg, Rng& rng) {
  if (x_tilde.channels != net.config().in_channels)
    throw ShapeError("c", net.config().in_channels, x_tilde.channels, "rfr_loss_step");
  const SyntheticPair pair = synthesize_pair(x_tilde, cfg, rng);
  ForwardCache<float> cache;
  const Tensor<float> pred = net.forward(to_tensor(pair.input), cache);
  const LossResult<float> loss = compute_loss(cfg.loss, pred, to_tensor(pair.target));
  net.backward(cache, loss.grad);
  return loss.loss;
}

struct FinetuneResult {
  DenoiserNet<float> net;
  Image pseudo_clean;
  Image final;
  std::vector<double> losses;
  /// denoise(net_m, Y) after m updates, for each requested m <= iters.
  std::map<std::size_t, Image> snapshots;
};

/// Test-time fine-tuning on a single noisy image. The caller's network is
/// copied, never modified.
inline FinetuneResult rfr_finetune(const DenoiserNet<float>& baseline, const Image& noisy,
                                   const FinetuneConfig& cfg,
                                   const std::vector<std::size_t>& snapshot_iters = {}) {
  cfg.validate();
  if (noisy.channels != baseline.config().in_channels)
    throw ShapeError("c", baseline.config().in_channels, noisy.channels, "rfr_finetune");

  FinetuneResult result{baseline, pseudo_clean(baseline, noisy), {}, {}, {}};
  DenoiserNet<float>& net = result.net;
  const Image& x_tilde = result.pseudo_clean;

  auto wants_snapshot = [&](std::size_t m) {
    for (std::size_t s : snapshot_iters)
      if (s == m) return true;
    return false;
  };
  if (wants_snapshot(0)) result.snapshots.emplace(0, x_tilde);

  Rng rng(cfg.seed);
  AdamState<float> adam(net, AdamParams{cfg.lr});
  result.losses.reserve(cfg.iters);
  for (std::size_t i = 0; i < cfg.iters; ++i) {
    net.zero_grad();
    result.losses.push_back(rfr_loss_step(net, x_tilde, cfg, rng));
    if (cfg.optimizer == OptimizerKind::adam)
      adam_step(net, adam);
    else
      sgd_step(net, cfg.lr);
    if (wants_snapshot(i + 1)) result.snapshots.emplace(i + 1, denoise(net, noisy));
  }
  net.zero_grad();
  if (cfg.iters == 0)
    result.final = x_tilde;
  else if (auto it = result.snapshots.find(cfg.iters); it != result.snapshots.end())
    result.final = it->second;
  else
    result.final = denoise(net, noisy);
  return result;
}

}  // namespace rfr

#endif  // RFR_RFR_HPP
