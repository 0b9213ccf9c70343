#ifndef RFR_EXPERIMENTS_HPP
#define RFR_EXPERIMENTS_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rfr/metrics.hpp"
#include "rfr/noise.hpp"
#include "rfr/rfr.hpp"
#include "rfr/selfsim.hpp"

namespace rfr {

struct SelfsimRow {
  std::size_t k = 0;
  double psnr_before = 0.0;
  double psnr_after = 0.0;
  double ssim_before = 0.0;
  double ssim_after = 0.0;
};

struct SelfsimOptions {
  std::vector<std::size_t> ks{1, 4, 9, 16, 25};
  double sigma = sigma_from_255(25.0);
  std::size_t seeds = 10;
  std::uint64_t seed = 0;
  RecurrenceOptions layout;
};

/// Per-k means over `seeds` recurrence images. Seed s uses layout seed
/// seed + s and the same noise stream for every k. Without a network the
/// noisy image itself is averaged.
inline std::vector<SelfsimRow> selfsim_table(const DenoiserNet<float>* net,
                                             const SelfsimOptions& opt) {
  if (opt.seeds == 0) throw std::invalid_argument("selfsim_table: seeds must be >= 1");
  std::vector<SelfsimRow> rows;
  for (std::size_t k : opt.ks) {
    SelfsimRow row{k};
    for (std::size_t s = 0; s < opt.seeds; ++s) {
      const auto layout = make_grid_layout(k, opt.seed + s, opt.layout);
      Rng rng(opt.seed + s);
      const Image noisy = add_awgn(make_recurrence_image(layout), opt.sigma, rng);
      const auto r = average_recurring_patches(net ? denoise(*net, noisy) : noisy, layout);
      row.psnr_before += r.psnr_before;
      row.psnr_after += r.psnr_after;
      row.ssim_before += r.ssim_before;
      row.ssim_after += r.ssim_after;
    }
    const double n = static_cast<double>(opt.seeds);
    row.psnr_before /= n;
    row.psnr_after /= n;
    row.ssim_before /= n;
    row.ssim_after /= n;
    rows.push_back(row);
  }
  return rows;
}

inline void write_selfsim_csv(std::ostream& os, const std::vector<SelfsimRow>& rows) {
  os << "k,psnr_before,psnr_after,ssim_before,ssim_after\n";
  for (const auto& r : rows)
    os << r.k << ',' << format_number(r.psnr_before) << ',' << format_number(r.psnr_after) << ','
       << format_number(r.ssim_before) << ',' << format_number(r.ssim_after) << '\n';
}

struct SweepImage {
  std::string id;
  Image clean;
};

struct SweepResult {
  /// One report per M, rows ordered by id.
  std::map<std::size_t, CorpusReport> by_iters;
};

/// Fine-tunes once per image up to max(M) and scores the snapshot at every M.
/// Image i is corrupted with AWGN at `test_sigma` from Rng(noise_seed + i)
/// and fine-tuned with seed cfg.seed + i.
inline SweepResult rfr_sweep(const DenoiserNet<float>& baseline,
                             const std::vector<SweepImage>& corpus, double test_sigma,
                             const std::vector<std::size_t>& iters, FinetuneConfig cfg,
                             std::uint64_t noise_seed, const std::string& mode) {
  if (corpus.empty()) throw std::invalid_argument("rfr_sweep: empty corpus");
  if (iters.empty()) throw std::invalid_argument("rfr_sweep: no iteration counts");
  std::size_t max_iters = 0;
  for (std::size_t m : iters) max_iters = std::max(max_iters, m);
  cfg.iters = max_iters;

  std::map<std::size_t, std::vector<ScoredPair>> pairs;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Rng rng(noise_seed + i);
    const Image noisy = add_awgn(corpus[i].clean, test_sigma, rng);
    FinetuneConfig image_cfg = cfg;
    image_cfg.seed = cfg.seed + i;
    const auto r = rfr_finetune(baseline, noisy, image_cfg, iters);
    for (std::size_t m : iters) pairs[m].push_back({corpus[i].id, r.snapshots.at(m), corpus[i].clean});
  }
  SweepResult out;
  for (auto& [m, p] : pairs)
    out.by_iters.emplace(m, evaluate_corpus(p, ConditionTags{test_sigma * 255.0, m, mode}));
  return out;
}

}  // namespace rfr

#endif  // RFR_EXPERIMENTS_HPP
