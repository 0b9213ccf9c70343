#ifndef RFR_METRICS_HPP
#define RFR_METRICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfr/image.hpp"

namespace rfr {

/// Returned by psnr() for identical images.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

inline bool is_infinite_psnr(double v) noexcept { return std::isinf(v) && v > 0; }

/// Mean squared difference of two equally sized sample buffers, accumulated
/// in double.
template <typename A, typename B>
double mse(std::span<const A> a, std::span<const B> b) {
  if (a.size() != b.size()) throw ShapeError("numel", a.size(), b.size(), "mse");
  if (a.empty()) throw std::invalid_argument("mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

inline double mse(const Image& a, const Image& b) {
  check_same_geometry(a, b, "mse");
  return mse(std::span<const float>(a.data), std::span<const float>(b.data));
}

/// 10 log10(peak^2 / MSE) with the MSE taken jointly over all channels.
inline double psnr_from_mse(double mse_value, double peak = 1.0) {
  if (mse_value == 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(peak * peak / mse_value);
}

template <typename A, typename B>
double psnr(std::span<const A> a, std::span<const B> b, double peak = 1.0) {
  return psnr_from_mse(mse(a, b), peak);
}

inline double psnr(const Image& a, const Image& b, double peak = 1.0) {
  return psnr_from_mse(mse(a, b), peak);
}

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

namespace detail {

inline std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> w(size);
  const double c = static_cast<double>(size / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

/// Separable "valid" filtering of an h x w plane: output is
/// (h - n + 1) x (w - n + 1).
inline std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h,
                                        std::size_t w, const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t ow = w - n + 1;
  const std::size_t oh = h - n + 1;
  std::vector<double> tmp(h * ow);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += k[i] * plane[y * w + x + i];
      tmp[y * ow + x] = acc;
    }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += k[i] * tmp[(y + i) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

}  // namespace detail

/// Mean local SSIM with a Gaussian window over the valid region, averaged over
/// channels.
inline double ssim(const Image& a, const Image& b, const SsimOptions& opt = {}) {
  check_same_geometry(a, b, "ssim");
  if (a.height < opt.window || a.width < opt.window)
    throw std::invalid_argument("ssim: image smaller than the " + std::to_string(opt.window) +
                                "x" + std::to_string(opt.window) + " window");
  const auto kernel = detail::gaussian_window(opt.window, opt.sigma);
  const double c1 = std::pow(opt.k1 * opt.dynamic_range, 2);
  const double c2 = std::pow(opt.k2 * opt.dynamic_range, 2);
  const std::size_t h = a.height;
  const std::size_t w = a.width;

  double total = 0.0;
  for (std::size_t c = 0; c < a.channels; ++c) {
    std::vector<double> pa(h * w), pb(h * w), paa(h * w), pbb(h * w), pab(h * w);
    for (std::size_t i = 0; i < h * w; ++i) {
      const double x = a.data[c * h * w + i];
      const double y = b.data[c * h * w + i];
      pa[i] = x;
      pb[i] = y;
      paa[i] = x * x;
      pbb[i] = y * y;
      pab[i] = x * y;
    }
    const auto mu_a = detail::filter_valid(pa, h, w, kernel);
    const auto mu_b = detail::filter_valid(pb, h, w, kernel);
    const auto e_aa = detail::filter_valid(paa, h, w, kernel);
    const auto e_bb = detail::filter_valid(pbb, h, w, kernel);
    const auto e_ab = detail::filter_valid(pab, h, w, kernel);
    double acc = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double ma = mu_a[i];
      const double mb = mu_b[i];
      const double va = e_aa[i] - ma * ma;
      const double vb = e_bb[i] - mb * mb;
      const double cov = e_ab[i] - ma * mb;
      acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    total += acc / static_cast<double>(mu_a.size());
  }
  return total / static_cast<double>(a.channels);
}

struct ScoreRow {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
  double sigma_255 = 0.0;
  std::size_t iters = 0;
  std::string mode;
};

struct ScoredPair {
  std::string id;
  Image restored;
  Image clean;
};

struct ConditionTags {
  double sigma_255 = 0.0;
  std::size_t iters = 0;
  std::string mode;
};

struct CorpusReport {
  std::vector<ScoreRow> rows;
  ScoreRow mean;
  /// Rows whose PSNR was the infinite sentinel; they are left out of the mean.
  std::size_t infinite_rows = 0;
};

inline constexpr const char* kMeanRowId = "__mean__";

/// Scores every pair and appends the arithmetic mean. Rows are ordered by id
/// and the mean is reduced in that order, so input order never matters.
inline CorpusReport evaluate_corpus(const std::vector<ScoredPair>& pairs,
                                    const ConditionTags& tags) {
  if (pairs.empty()) throw std::invalid_argument("evaluate_corpus: empty corpus");
  CorpusReport report;
  for (const auto& p : pairs)
    report.rows.push_back(ScoreRow{p.id, psnr(p.restored, p.clean), ssim(p.restored, p.clean),
                                   tags.sigma_255, tags.iters, tags.mode});
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const ScoreRow& a, const ScoreRow& b) {
    if (a.id != b.id) return a.id < b.id;
    if (a.psnr != b.psnr) return a.psnr < b.psnr;
    return a.ssim < b.ssim;
  });

  double psnr_sum = 0.0;
  double ssim_sum = 0.0;
  std::size_t finite = 0;
  for (const auto& r : report.rows) {
    ssim_sum += r.ssim;
    if (is_infinite_psnr(r.psnr)) {
      ++report.infinite_rows;
      continue;
    }
    psnr_sum += r.psnr;
    ++finite;
  }
  report.mean = ScoreRow{kMeanRowId,
                         finite == 0 ? kInfinitePsnr : psnr_sum / static_cast<double>(finite),
                         ssim_sum / static_cast<double>(report.rows.size()), tags.sigma_255,
                         tags.iters, tags.mode};
  return report;
}

inline constexpr const char* kScoreCsvHeader = "id,psnr_db,ssim,sigma_255,M,mode";

inline std::string format_number(double v, int precision = 6) {
  if (is_infinite_psnr(v)) return "inf";
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*f", precision, v);
  return buf.data();
}

inline void write_score_row(std::ostream& os, const ScoreRow& r) {
  os << r.id << ',' << format_number(r.psnr) << ',' << format_number(r.ssim) << ','
     << format_number(r.sigma_255, 2) << ',' << r.iters << ',' << r.mode << '\n';
}

inline void write_score_csv(std::ostream& os, const CorpusReport& report) {
  os << kScoreCsvHeader << '\n';
  for (const auto& r : report.rows) write_score_row(os, r);
  write_score_row(os, report.mean);
}

}  // namespace rfr

#endif  // RFR_METRICS_HPP
