#ifndef RFR_TEXTURE_HPP
#define RFR_TEXTURE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "rfr/image.hpp"
#include "rfr/noise.hpp"

namespace rfr {

/// Top-left corner of a patch, in pixels.
struct Position {
  std::size_t x = 0;
  std::size_t y = 0;
  bool operator==(const Position&) const = default;
};

namespace detail {

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

/// One octave of lattice value noise with `cells` lattice cells across the
/// longer side.
inline void add_value_noise_octave(std::vector<double>& plane, std::size_t h, std::size_t w,
                                   double cells, double amplitude, Rng& rng) {
  const double scale = cells / static_cast<double>(std::max(h, w));
  const std::size_t gh = static_cast<std::size_t>(std::ceil(static_cast<double>(h) * scale)) + 2;
  const std::size_t gw = static_cast<std::size_t>(std::ceil(static_cast<double>(w) * scale)) + 2;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> lattice(gh * gw);
  for (double& v : lattice) v = u(rng);
  for (std::size_t y = 0; y < h; ++y) {
    const double fy = static_cast<double>(y) * scale;
    const auto iy = static_cast<std::size_t>(fy);
    const double ty = smoothstep(fy - static_cast<double>(iy));
    for (std::size_t x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) * scale;
      const auto ix = static_cast<std::size_t>(fx);
      const double tx = smoothstep(fx - static_cast<double>(ix));
      const double a = lattice[iy * gw + ix];
      const double b = lattice[iy * gw + ix + 1];
      const double c = lattice[(iy + 1) * gw + ix];
      const double d = lattice[(iy + 1) * gw + ix + 1];
      const double top = a + (b - a) * tx;
      const double bottom = c + (d - c) * tx;
      plane[y * w + x] += amplitude * (top + (bottom - top) * ty);
    }
  }
}

/// Hard-edged primitives (bars, discs, stripes) that give the denoiser edges
/// to preserve.
inline void add_shapes(std::vector<double>& plane, std::size_t h, std::size_t w,
                       std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double H = static_cast<double>(h);
  const double W = static_cast<double>(w);
  for (std::size_t s = 0; s < count; ++s) {
    const int kind = static_cast<int>(u(rng) * 3.0);
    const double level = u(rng) * 0.8 - 0.4;
    const double cx = u(rng) * W;
    const double cy = u(rng) * H;
    const double r = (0.05 + 0.25 * u(rng)) * std::min(H, W);
    const double angle = u(rng) * 3.141592653589793;
    const double period = 3.0 + 9.0 * u(rng);
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double dx = static_cast<double>(x) - cx;
        const double dy = static_cast<double>(y) - cy;
        const double along = dx * ca + dy * sa;
        const double across = -dx * sa + dy * ca;
        bool inside = false;
        if (kind == 0) {
          inside = std::abs(along) < r && std::abs(across) < 0.3 * r;
        } else if (kind == 1) {
          inside = dx * dx + dy * dy < r * r;
        } else {
          inside = dx * dx + dy * dy < 1.5 * r * r &&
                   std::fmod(std::abs(along), period) < 0.5 * period;
        }
        if (inside) plane[y * w + x] += level;
      }
  }
}

inline void normalize_to(std::vector<double>& plane, double lo, double hi) {
  const auto [mn, mx] = std::minmax_element(plane.begin(), plane.end());
  const double a = *mn;
  const double span = std::max(*mx - a, 1e-12);
  for (double& v : plane) v = lo + (hi - lo) * (v - a) / span;
}

}  // namespace detail

struct TextureOptions {
  std::size_t octaves = 4;
  double base_cells = 3.0;
  std::size_t shapes = 6;
};

/// Procedural natural-ish content: multi-octave value noise plus hard-edged
/// shapes, rescaled into [0.05, 0.95].
inline Image generate_texture(std::size_t h, std::size_t w, std::size_t channels,
                              std::uint64_t seed, const TextureOptions& opt = {}) {
  Rng rng(seed);
  std::vector<double> base(h * w, 0.0);
  double cells = opt.base_cells;
  double amp = 1.0;
  for (std::size_t o = 0; o < opt.octaves; ++o) {
    detail::add_value_noise_octave(base, h, w, cells, amp, rng);
    cells *= 2.0;
    amp *= 0.5;
  }
  detail::add_shapes(base, h, w, opt.shapes, rng);

  Image img(h, w, channels);
  for (std::size_t c = 0; c < channels; ++c) {
    std::vector<double> plane = base;
    if (channels > 1) detail::add_value_noise_octave(plane, h, w, opt.base_cells, 0.4, rng);
    detail::normalize_to(plane, 0.05, 0.95);
    for (std::size_t i = 0; i < h * w; ++i) img.data[c * h * w + i] = static_cast<float>(plane[i]);
  }
  return img;
}

/// Motif content: higher-frequency texture so that copies carry fine detail.
inline Image generate_motif(std::size_t size, std::size_t channels, std::uint64_t seed) {
  return generate_texture(size, size, channels, seed,
                          TextureOptions{.octaves = 3, .base_cells = 4.0, .shapes = 3});
}

inline bool overlaps(const Position& a, const Position& b, std::size_t size) {
  return a.x < b.x + size && b.x < a.x + size && a.y < b.y + size && b.y < a.y + size;
}

/// `copies` non-overlapping positions for a size x size patch, one per
/// randomly chosen grid cell with random jitter inside the cell.
inline std::vector<Position> scatter_positions(std::size_t h, std::size_t w, std::size_t size,
                                               std::size_t copies, Rng& rng) {
  const std::size_t gy = h / size;
  const std::size_t gx = w / size;
  if (gy * gx < copies)
    throw std::invalid_argument("scatter_positions: " + std::to_string(copies) +
                                " copies of a " + std::to_string(size) +
                                " patch do not fit the canvas");
  std::vector<std::size_t> cells(gy * gx);
  std::iota(cells.begin(), cells.end(), 0);
  std::shuffle(cells.begin(), cells.end(), rng);
  const std::size_t cell_h = h / gy;
  const std::size_t cell_w = w / gx;
  std::vector<Position> out;
  for (std::size_t i = 0; i < copies; ++i) {
    const std::size_t cy = cells[i] / gx;
    const std::size_t cx = cells[i] % gx;
    std::uniform_int_distribution<std::size_t> jy(0, cell_h - size);
    std::uniform_int_distribution<std::size_t> jx(0, cell_w - size);
    out.push_back(Position{cx * cell_w + jx(rng), cy * cell_h + jy(rng)});
  }
  return out;
}

struct MotifTexture {
  Image image;
  Image motif;
  std::vector<Position> positions;
};

/// Texture with a motif stamped verbatim at `copies` non-overlapping places,
/// so every image carries exact internal repetition.
inline MotifTexture generate_motif_texture(std::size_t h, std::size_t w, std::size_t channels,
                                           std::uint64_t seed, std::size_t motif_size = 32,
                                           std::size_t copies = 4) {
  Rng rng(seed);
  const std::uint64_t bg_seed = rng();
  const std::uint64_t motif_seed = rng();
  MotifTexture out{generate_texture(h, w, channels, bg_seed), generate_motif(motif_size, channels, motif_seed), {}};
  out.positions = scatter_positions(h, w, motif_size, copies, rng);
  for (const auto& p : out.positions) stamp(out.image, out.motif, p.y, p.x);
  return out;
}

}  // namespace rfr

#endif  // RFR_TEXTURE_HPP
