#ifndef RFR_PRETRAIN_HPP
#define RFR_PRETRAIN_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "rfr/image.hpp"
#include "rfr/net.hpp"
#include "rfr/noise.hpp"
#include "rfr/optim.hpp"

namespace rfr {

struct PretrainConfig {
  NetConfig net;
  std::size_t steps = 30000;
  std::size_t batch = 8;
  std::size_t crop = 64;
  double lr_start = 1e-4;
  double lr_end = 1e-6;
  GaussianBlind sigma{0.0, sigma_from_255(50.0)};
  LossKind loss = LossKind::l1;
  bool augment = true;
  std::uint64_t seed = 0;
};

struct PretrainResult {
  DenoiserNet<float> net;
  std::vector<double> losses;
};

/// Draws a batch of augmented crops and corrupts each with its own blind
/// noise level. Returns (noisy, clean) as N x C x crop x crop tensors.
inline std::pair<Tensor<float>, Tensor<float>> sample_training_batch(
    const std::vector<Image>& corpus, const PretrainConfig& cfg, Rng& rng) {
  const std::size_t c = corpus.front().channels;
  const Shape shape{cfg.batch, c, cfg.crop, cfg.crop};
  Tensor<float> noisy(shape);
  Tensor<float> clean(shape);
  std::uniform_int_distribution<std::size_t> pick_image(0, corpus.size() - 1);
  std::uniform_int_distribution<unsigned> pick_transform(0, kDihedralCount - 1);
  for (std::size_t n = 0; n < cfg.batch; ++n) {
    const Image& src = corpus[pick_image(rng)];
    std::uniform_int_distribution<std::size_t> py(0, src.height - cfg.crop);
    std::uniform_int_distribution<std::size_t> px(0, src.width - cfg.crop);
    const std::size_t y0 = py(rng);
    const std::size_t x0 = px(rng);
    Image patch = crop(src, y0, x0, cfg.crop, cfg.crop);
    if (cfg.augment) patch = apply(static_cast<Dihedral>(pick_transform(rng)), patch);
    const Image corrupted = add_awgn(patch, sample_sigma(cfg.sigma, rng), rng);
    std::copy(patch.data.begin(), patch.data.end(), clean.sample(n).begin());
    std::copy(corrupted.data.begin(), corrupted.data.end(), noisy.sample(n).begin());
  }
  return {std::move(noisy), std::move(clean)};
}

/// Supervised blind-sigma pre-training with Adam and a cosine learning-rate
/// decay. `on_step(step, loss, lr)` is called after every update.
inline PretrainResult pretrain(
    const std::vector<Image>& corpus, const PretrainConfig& cfg,
    const std::function<void(std::size_t, double, double)>& on_step = {}) {
  if (corpus.empty()) throw std::invalid_argument("pretrain: empty corpus");
  if (cfg.batch == 0) throw std::invalid_argument("pretrain: batch must be >= 1");
  for (const auto& img : corpus) {
    if (img.channels != cfg.net.in_channels)
      throw ShapeError("c", cfg.net.in_channels, img.channels, "pretrain");
    if (img.height < cfg.crop || img.width < cfg.crop)
      throw std::invalid_argument("pretrain: image smaller than the crop size");
  }

  Rng rng(cfg.seed);
  PretrainResult result{init_net<float>(cfg.net, rng()), {}};
  DenoiserNet<float>& net = result.net;
  AdamState<float> adam(net, AdamParams{cfg.lr_start});
  ForwardCache<float> cache;
  result.losses.reserve(cfg.steps);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    auto [noisy, clean] = sample_training_batch(corpus, cfg, rng);
    net.zero_grad();
    const Tensor<float> pred = net.forward(noisy, cache);
    const LossResult<float> loss = compute_loss(cfg.loss, pred, clean);
    net.backward(cache, loss.grad);
    adam.params.lr = cosine_lr(step, cfg.steps, cfg.lr_start, cfg.lr_end);
    adam_step(net, adam);
    result.losses.push_back(loss.loss);
    if (on_step) on_step(step, loss.loss, adam.params.lr);
  }
  net.zero_grad();
  return result;
}

}  // namespace rfr

#endif  // RFR_PRETRAIN_HPP
