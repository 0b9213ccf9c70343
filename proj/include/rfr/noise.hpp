#ifndef RFR_NOISE_HPP
#define RFR_NOISE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "rfr/image.hpp"

namespace rfr {

using Rng = std::mt19937_64;

/// Converts a noise level quoted on the 0-255 scale to image units.
inline constexpr double sigma_from_255(double s) { return s / 255.0; }

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Gamma-curve camera response family, f(x) = x^gamma on [0, 1]. One gamma
/// is drawn uniformly from `gammas` per noise synthesis call.
struct CrfParams {
  std::vector<double> gammas;

  /// `count` gammas spaced evenly in log between lo and hi.
  static CrfParams log_uniform(std::size_t count = 201, double lo = 1.0 / 3.0, double hi = 3.0) {
    CrfParams p;
    if (count == 1) {
      p.gammas = {std::sqrt(lo * hi)};
      return p;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i)
      p.gammas.push_back(std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1)));
    return p;
  }

  static CrfParams fixed(double gamma) { return CrfParams{{gamma}}; }
};

inline double crf_apply(double x, double gamma) { return std::pow(x, gamma); }
inline double crf_invert(double y, double gamma) { return std::pow(y, 1.0 / gamma); }

struct GaussianKnown {
  double sigma = 0.0;
};

struct GaussianBlind {
  double lo = 0.0;
  double hi = sigma_from_255(50.0);
};

/// Heteroscedastic (Poissonian-Gaussian) noise in raw space behind a CRF.
/// Variance at raw intensity x is read + shot * x.
struct Isp {
  CrfParams crf = CrfParams::log_uniform();
  Range shot{1e-4, 1e-2};
  Range read{1e-6, 1e-4};
};

using NoiseSpec = std::variant<GaussianKnown, GaussianBlind, Isp>;

inline void validate(const NoiseSpec& spec) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GaussianKnown>) {
          if (!(s.sigma >= 0.0)) throw std::invalid_argument("GaussianKnown: sigma must be >= 0");
        } else if constexpr (std::is_same_v<S, GaussianBlind>) {
          if (!(s.lo >= 0.0 && s.lo <= s.hi))
            throw std::invalid_argument("GaussianBlind: need 0 <= lo <= hi");
        } else {
          if (s.crf.gammas.empty()) throw std::invalid_argument("Isp: empty CRF set");
          for (double g : s.crf.gammas)
            if (!(g > 0.0)) throw std::invalid_argument("Isp: gamma must be > 0");
          if (!(s.shot.lo >= 0.0 && s.shot.lo <= s.shot.hi && s.read.lo >= 0.0 &&
                s.read.lo <= s.read.hi))
            throw std::invalid_argument("Isp: lambda ranges must be nonnegative and ordered");
        }
      },
      spec);
}

inline double draw_uniform(const Range& r, Rng& rng) {
  if (r.lo == r.hi) return r.lo;
  std::uniform_real_distribution<double> u(r.lo, r.hi);
  return std::min(u(rng), r.hi);
}

/// image + N(0, sigma^2) per sample, unclamped.
inline Image add_awgn(const Image& image, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_awgn: sigma must be >= 0");
  Image out = image;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (float& v : out.data) v = static_cast<float>(v + sigma * normal(rng));
  return out;
}

inline double sample_sigma(const GaussianBlind& spec, Rng& rng) {
  return draw_uniform(Range{spec.lo, spec.hi}, rng);
}

/// Draw order: CRF index, shot, read, then one standard normal per sample in
/// storage order.
inline Image add_isp_noise(const Image& image, const Isp& spec, Rng& rng) {
  constexpr double tol = 1e-6;
  for (float v : image.data)
    if (!(v >= -tol && v <= 1.0 + tol))
      throw std::domain_error("add_isp_noise: image value " + std::to_string(v) +
                              " outside [0, 1]");
  if (spec.crf.gammas.empty()) throw std::invalid_argument("add_isp_noise: empty CRF set");

  std::uniform_int_distribution<std::size_t> pick(0, spec.crf.gammas.size() - 1);
  const double gamma = spec.crf.gammas[pick(rng)];
  const double shot = draw_uniform(spec.shot, rng);
  const double read = draw_uniform(spec.read, rng);

  std::normal_distribution<double> normal(0.0, 1.0);
  Image out = image;
  for (float& v : out.data) {
    const double raw = crf_invert(std::clamp(static_cast<double>(v), 0.0, 1.0), gamma);
    const double variance = read + shot * raw;
    const double noisy = raw + std::sqrt(variance) * normal(rng);
    v = static_cast<float>(crf_apply(std::clamp(noisy, 0.0, 1.0), gamma));
  }
  return out;
}

inline Image add_noise(const Image& image, const NoiseSpec& spec, Rng& rng) {
  return std::visit(
      [&](const auto& s) -> Image {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GaussianKnown>) {
          return add_awgn(image, s.sigma, rng);
        } else if constexpr (std::is_same_v<S, GaussianBlind>) {
          return add_awgn(image, sample_sigma(s, rng), rng);
        } else {
          return add_isp_noise(image, s, rng);
        }
      },
      spec);
}

inline std::string noise_name(const NoiseSpec& spec) {
  switch (spec.index()) {
    case 0: return "gaussian";
    case 1: return "blind";
    default: return "isp";
  }
}

}  // namespace rfr

#endif  // RFR_NOISE_HPP
