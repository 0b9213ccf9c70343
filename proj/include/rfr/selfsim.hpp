#ifndef RFR_SELFSIM_HPP
#define RFR_SELFSIM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfr/image.hpp"
#include "rfr/metrics.hpp"
#include "rfr/net.hpp"
#include "rfr/texture.hpp"

namespace rfr {

class LayoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// k verbatim copies of `patch` placed on `canvas`.
struct RecurrenceLayout {
  Image patch;
  std::vector<Position> positions;
  Image canvas;

  std::size_t k() const noexcept { return positions.size(); }
  std::size_t patch_size() const noexcept { return patch.height; }

  void validate() const {
    if (patch.empty() || patch.height != patch.width)
      throw LayoutError("layout: patch must be square and non-empty");
    if (patch.channels != canvas.channels)
      throw LayoutError("layout: patch and canvas channel counts differ");
    if (positions.empty()) throw LayoutError("layout: no positions");
    const std::size_t p = patch.height;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const Position& a = positions[i];
      if (a.x + p > canvas.width || a.y + p > canvas.height)
        throw LayoutError("layout: copy " + std::to_string(i) + " at (" + std::to_string(a.x) +
                          ", " + std::to_string(a.y) + ") leaves the canvas");
      for (std::size_t j = 0; j < i; ++j)
        if (overlaps(a, positions[j], p))
          throw LayoutError("layout: copies " + std::to_string(j) + " and " + std::to_string(i) +
                            " overlap");
    }
  }
};

/// sqrt(k) x sqrt(k) grid, each copy centred in its cell. k must be a square.
inline std::vector<Position> grid_positions(std::size_t canvas_h, std::size_t canvas_w,
                                            std::size_t patch, std::size_t k) {
  const auto g = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(k))));
  if (g == 0 || g * g != k) throw LayoutError("grid_positions: k must be a positive square");
  const std::size_t cell_h = canvas_h / g;
  const std::size_t cell_w = canvas_w / g;
  if (cell_h < patch || cell_w < patch)
    throw LayoutError("grid_positions: " + std::to_string(k) + " copies of a " +
                      std::to_string(patch) + " patch do not fit the canvas");
  std::vector<Position> out;
  for (std::size_t gy = 0; gy < g; ++gy)
    for (std::size_t gx = 0; gx < g; ++gx)
      out.push_back(Position{gx * cell_w + (cell_w - patch) / 2, gy * cell_h + (cell_h - patch) / 2});
  return out;
}

inline Image make_recurrence_image(const RecurrenceLayout& layout) {
  layout.validate();
  Image img = layout.canvas;
  for (const auto& p : layout.positions) stamp(img, layout.patch, p.y, p.x);
  return img;
}

struct RecurrenceOptions {
  std::size_t canvas = 160;
  std::size_t patch = 32;
  std::size_t channels = 1;
};

/// Textured background with a textured patch on a k-grid, both drawn from
/// `seed`.
inline RecurrenceLayout make_grid_layout(std::size_t k, std::uint64_t seed,
                                         const RecurrenceOptions& opt = {}) {
  Rng rng(seed);
  const std::uint64_t canvas_seed = rng();
  const std::uint64_t patch_seed = rng();
  RecurrenceLayout layout{generate_motif(opt.patch, opt.channels, patch_seed),
                          grid_positions(opt.canvas, opt.canvas, opt.patch, k),
                          generate_texture(opt.canvas, opt.canvas, opt.channels, canvas_seed)};
  layout.validate();
  return layout;
}

inline std::vector<Image> extract_patches(const Image& img, const RecurrenceLayout& layout) {
  const std::size_t p = layout.patch_size();
  std::vector<Image> out;
  out.reserve(layout.k());
  for (const auto& pos : layout.positions) {
    if (pos.x + p > img.width || pos.y + p > img.height)
      throw LayoutError("extract_patches: position outside the image");
    out.push_back(crop(img, pos.y, pos.x, p, p));
  }
  return out;
}

/// Elementwise mean, summed in list order.
inline Image average_images(const std::vector<Image>& images) {
  if (images.empty()) throw std::invalid_argument("average_images: empty list");
  std::vector<double> acc(images.front().size(), 0.0);
  for (const auto& img : images) {
    check_same_geometry(images.front(), img, "average_images");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += img.data[i];
  }
  Image out = images.front();
  const double inv = 1.0 / static_cast<double>(images.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out.data[i] = static_cast<float>(acc[i] * inv);
  return out;
}

struct AveragingResult {
  Image average;
  /// From the MSE averaged over the individual copies.
  double psnr_before = 0.0;
  double psnr_after = 0.0;
  /// Mean per-copy SSIM.
  double ssim_before = 0.0;
  double ssim_after = 0.0;
};

/// Averages the k restored copies and scores them against the clean patch
/// before and after averaging.
inline AveragingResult average_recurring_patches(const Image& restored,
                                                 const RecurrenceLayout& layout) {
  layout.validate();
  const auto patches = extract_patches(restored, layout);
  AveragingResult r;
  r.average = average_images(patches);
  double mse_sum = 0.0;
  double ssim_sum = 0.0;
  for (const auto& p : patches) {
    mse_sum += mse(p, layout.patch);
    ssim_sum += ssim(p, layout.patch);
  }
  const double k = static_cast<double>(patches.size());
  r.psnr_before = psnr_from_mse(mse_sum / k);
  r.ssim_before = ssim_sum / k;
  r.psnr_after = psnr(r.average, layout.patch);
  r.ssim_after = ssim(r.average, layout.patch);
  return r;
}

struct ShiftDeviation {
  std::ptrdiff_t dy = 0;
  std::ptrdiff_t dx = 0;
  double max_deviation = 0.0;
  /// Pixels compared; zero padding restricts this to the region whose
  /// receptive field avoids borders and the wrap seam.
  std::size_t compared = 0;
};

/// Compares f(shift(x)) with shift(f(x)) for each integer shift.
inline std::vector<ShiftDeviation> equivariance_report(
    const DenoiserNet<float>& net, const Image& image,
    const std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>>& shifts) {
  const Image base = denoise(net, image);
  const auto H = static_cast<std::ptrdiff_t>(image.height);
  const auto W = static_cast<std::ptrdiff_t>(image.width);
  const bool circular = net.config().padding == PaddingMode::circular;
  const auto margin = static_cast<std::ptrdiff_t>(net.config().receptive_margin());

  std::vector<ShiftDeviation> out;
  for (const auto& [dy, dx] : shifts) {
    const Image shifted = denoise(net, shift_circular(image, dy, dx));
    ShiftDeviation d{dy, dx, 0.0, 0};
    // Pixel (y, x) of the original frame lands on (y + dy, x + dx).
    std::ptrdiff_t y0 = 0, y1 = H, x0 = 0, x1 = W;
    if (!circular) {
      y0 = std::max(margin, margin - dy);
      y1 = std::min(H - margin, H - margin - dy);
      x0 = std::max(margin, margin - dx);
      x1 = std::min(W - margin, W - margin - dx);
    }
    for (std::size_t c = 0; c < image.channels; ++c)
      for (std::ptrdiff_t y = y0; y < y1; ++y)
        for (std::ptrdiff_t x = x0; x < x1; ++x) {
          const float a = base.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c);
          const float b = shifted.at(static_cast<std::size_t>(detail::wrap(y + dy, H)),
                                     static_cast<std::size_t>(detail::wrap(x + dx, W)), c);
          d.max_deviation = std::max(d.max_deviation, std::abs(static_cast<double>(a) - b));
          ++d.compared;
        }
    out.push_back(d);
  }
  return out;
}

struct LocationSpread {
  /// Largest max-abs difference to any other copy.
  double max_pairwise = 0.0;
  /// RMS distance to the mean of all copies.
  double rms_to_mean = 0.0;
};

struct SpreadReport {
  std::vector<LocationSpread> locations;
  double max_pairwise = 0.0;
  double mean_rms_to_mean = 0.0;
};

inline SpreadReport patch_spread(const std::vector<Image>& patches) {
  SpreadReport report;
  const Image mean = average_images(patches);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    LocationSpread s;
    for (std::size_t j = 0; j < patches.size(); ++j) {
      if (i == j) continue;
      for (std::size_t e = 0; e < mean.size(); ++e)
        s.max_pairwise = std::max(
            s.max_pairwise, std::abs(static_cast<double>(patches[i].data[e]) - patches[j].data[e]));
    }
    s.rms_to_mean = std::sqrt(mse(patches[i], mean));
    report.max_pairwise = std::max(report.max_pairwise, s.max_pairwise);
    report.mean_rms_to_mean += s.rms_to_mean;
    report.locations.push_back(s);
  }
  report.mean_rms_to_mean /= static_cast<double>(patches.size());
  return report;
}

/// How far apart the network's outputs are at the k recurring locations.
inline SpreadReport output_spread(const DenoiserNet<float>& net, const RecurrenceLayout& layout,
                                  const Image& noisy) {
  layout.validate();
  return patch_spread(extract_patches(denoise(net, noisy), layout));
}

}  // namespace rfr

#endif  // RFR_SELFSIM_HPP
