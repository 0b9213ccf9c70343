#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rfr/checkpoint.hpp"
#include "rfr/experiments.hpp"
#include "rfr/png_io.hpp"
#include "rfr/pretrain.hpp"
#include "rfr/rfr.hpp"
#include "rfr/selfsim.hpp"
#include "rfr/texture.hpp"

namespace fs = std::filesystem;
using namespace rfr;

namespace {

struct NetOptions {
  std::uint32_t depth = 8;
  std::uint32_t width = 32;
  std::uint32_t kernel = 3;
  std::uint32_t channels = 1;
  std::string padding = "zero";

  NetConfig config() const {
    return NetConfig{depth, width, kernel, channels,
                     padding == "circular" ? PaddingMode::circular : PaddingMode::zero, true};
  }
};

struct NoiseOptions {
  std::string kind = "gaussian";
  double sigma = 25.0;
  double sigma_max = 50.0;

  NoiseSpec spec() const {
    if (kind == "blind") return GaussianBlind{0.0, sigma_from_255(sigma_max)};
    if (kind == "isp") return Isp{};
    return GaussianKnown{sigma_from_255(sigma)};
  }
};

void add_noise_options(CLI::App* cmd, NoiseOptions& o) {
  cmd->add_option("--noise", o.kind, "Fine-tuning noise model")
      ->check(CLI::IsMember({"gaussian", "blind", "isp"}))
      ->capture_default_str();
  cmd->add_option("--sigma", o.sigma, "Known noise level on the 0-255 scale")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--sigma-max", o.sigma_max, "Upper end of the blind noise range (0-255 scale)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

LossKind parse_loss(const std::string& s) { return s == "l1" ? LossKind::l1 : LossKind::l2; }

std::string format_fixed(double v, int precision = 4) { return format_number(v, precision); }

/// Sorted *.png files of a directory.
std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

/// Writes the subcommand's resolved options as an INI section; passing it back
/// through --config reproduces the run.
void write_snapshot(const CLI::App* cmd, const fs::path& path, const std::string& extra = {}) {
  ensure_parent(path);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << '[' << cmd->get_name() << "]\n" << cmd->config_to_str(true, false);
  if (!extra.empty()) os << "; " << extra << '\n';
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  return fs::path(p.string() + suffix);
}

std::string image_id(const fs::path& p) { return p.stem().string(); }

// Layout sidecar: a "patch_size k" header line, then one "x y" line per copy.
void write_layout(const fs::path& path, const RecurrenceLayout& layout) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << layout.patch_size() << ' ' << layout.k() << '\n';
  for (const auto& p : layout.positions) os << p.x << ' ' << p.y << '\n';
}

RecurrenceLayout read_layout(const fs::path& path, const Image& image) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read layout " + path.string());
  std::size_t patch = 0, k = 0;
  if (!(is >> patch >> k)) throw std::runtime_error("bad layout header in " + path.string());
  std::vector<Position> positions(k);
  for (auto& p : positions)
    if (!(is >> p.x >> p.y)) throw std::runtime_error("truncated layout " + path.string());
  RecurrenceLayout layout{Image(patch, patch, image.channels), std::move(positions), image};
  layout.validate();
  layout.patch = crop(image, layout.positions[0].y, layout.positions[0].x, patch, patch);
  return layout;
}

struct GenDataArgs {
  std::size_t count = 8;
  std::size_t size = 0;
  std::string kind = "texture";
  std::uint64_t seed = 0;
  std::string out;
  std::size_t channels = 1;
  std::size_t motif = 32;
  std::size_t copies = 4;
  std::size_t k = 25;
};

int run_gen_data(const CLI::App* cmd, const GenDataArgs& a) {
  const fs::path dir(a.out);
  fs::create_directories(dir);
  const std::size_t size = a.size > 0 ? a.size : (a.kind == "texture" ? 128 : 160);
  for (std::size_t i = 0; i < a.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%04zu", i);
    const std::uint64_t seed = a.seed + i;
    if (a.kind == "texture") {
      write_png(dir / (std::string(name) + ".png"),
                generate_motif_texture(size, size, a.channels, seed, a.motif, a.copies).image);
    } else {
      const auto layout =
          make_grid_layout(a.k, seed, RecurrenceOptions{size, a.motif, a.channels});
      // Quantise first so the copies stay verbatim in the PNG.
      write_png(dir / (std::string(name) + ".png"), quantize8(make_recurrence_image(layout)));
      write_layout(dir / (std::string(name) + ".layout"), layout);
    }
  }
  write_snapshot(cmd, dir / "gen-data.config.ini");
  std::cout << "wrote " << a.count << ' ' << a.kind << " images to " << dir.string() << '\n';
  return 0;
}

struct PretrainArgs {
  std::string data;
  std::string out;
  NetOptions net;
  std::size_t steps = 30000;
  double epochs = 0.0;
  std::size_t batch = 8;
  std::size_t crop = 64;
  double lr_start = 1e-4;
  double lr_end = 1e-6;
  double sigma_max = 50.0;
  std::string loss = "l1";
  bool no_augment = false;
  std::uint64_t seed = 0;
  std::size_t log_every = 100;
};

int run_pretrain(const CLI::App* cmd, const PretrainArgs& a) {
  std::vector<Image> corpus;
  for (const auto& p : list_pngs(a.data)) corpus.push_back(read_png(p, a.net.channels));
  if (corpus.empty()) throw std::runtime_error("empty corpus: no PNG files in " + a.data);

  PretrainConfig cfg;
  cfg.net = a.net.config();
  cfg.steps = a.steps;
  if (a.epochs > 0.0)
    cfg.steps = static_cast<std::size_t>(
        std::ceil(a.epochs * static_cast<double>(corpus.size()) / static_cast<double>(a.batch)));
  cfg.batch = a.batch;
  cfg.crop = a.crop;
  cfg.lr_start = a.lr_start;
  cfg.lr_end = a.lr_end;
  cfg.sigma = GaussianBlind{0.0, sigma_from_255(a.sigma_max)};
  cfg.loss = parse_loss(a.loss);
  cfg.augment = !a.no_augment;
  cfg.seed = a.seed;

  const fs::path out(a.out);
  ensure_parent(out);
  std::ofstream loss_csv(with_suffix(out, ".loss.csv"));
  loss_csv << "step,loss,lr\n";
  const auto result = pretrain(corpus, cfg, [&](std::size_t step, double loss, double lr) {
    loss_csv << step << ',' << format_number(loss, 8) << ',' << format_number(lr, 10) << '\n';
    if (a.log_every > 0 && (step % a.log_every == 0 || step + 1 == cfg.steps))
      std::cerr << "step " << step << " loss " << loss << " lr " << lr << '\n';
  });
  save_checkpoint(result.net, out);
  write_snapshot(cmd, with_suffix(out, ".config.ini"));
  std::cout << "trained " << cfg.steps << " steps, checkpoint " << out.string() << '\n';
  return 0;
}

struct DenoiseArgs {
  std::string checkpoint;
  std::string input;
  std::string output;
  std::string clean;
};

void print_scores(const std::string& label, const Image& restored, const Image& clean) {
  std::cout << label << " psnr " << format_number(psnr(restored, clean)) << " ssim "
            << format_number(ssim(restored, clean)) << '\n';
}

int run_denoise(const DenoiseArgs& a) {
  const auto net = load_checkpoint(a.checkpoint);
  const Image noisy = read_png(a.input, net.config().in_channels);
  const Image restored = denoise(net, noisy);
  ensure_parent(a.output);
  write_png(a.output, restored);
  if (!a.clean.empty()) print_scores("denoised", quantize8(restored), read_png(a.clean, noisy.channels));
  return 0;
}

struct RfrArgs {
  std::string checkpoint;
  std::string input;
  std::string output;
  std::size_t iters = 40;
  double lr = 1e-5;
  NoiseOptions noise;
  std::string loss = "l2";
  std::string optimizer = "adam";
  bool no_augment = false;
  std::uint64_t seed = 0;
  std::string clean;
};

int run_rfr(const CLI::App* cmd, const RfrArgs& a) {
  const auto net = load_checkpoint(a.checkpoint);
  const Image noisy = read_png(a.input, net.config().in_channels);
  FinetuneConfig cfg;
  cfg.iters = a.iters;
  cfg.lr = a.lr;
  cfg.loss = parse_loss(a.loss);
  cfg.noise = a.noise.spec();
  cfg.augment = !a.no_augment;
  cfg.seed = a.seed;
  cfg.optimizer = a.optimizer == "sgd" ? OptimizerKind::sgd : OptimizerKind::adam;
  const auto result = rfr_finetune(net, noisy, cfg);

  const fs::path out(a.output);
  ensure_parent(out);
  write_png(out, result.final);
  std::ofstream loss_csv(with_suffix(out, ".loss.csv"));
  loss_csv << "iter,loss\n";
  for (std::size_t i = 0; i < result.losses.size(); ++i)
    loss_csv << i + 1 << ',' << format_number(result.losses[i], 8) << '\n';
  write_snapshot(cmd, with_suffix(out, ".config.ini"));

  if (!a.clean.empty()) {
    const Image clean = read_png(a.clean, noisy.channels);
    const std::string mode = noise_name(cfg.noise);
    CorpusReport report;
    report.rows = {ScoreRow{"baseline", psnr(quantize8(result.pseudo_clean), clean),
                            ssim(quantize8(result.pseudo_clean), clean), a.noise.sigma, 0, mode},
                   ScoreRow{"finetuned", psnr(quantize8(result.final), clean),
                            ssim(quantize8(result.final), clean), a.noise.sigma, a.iters, mode}};
    std::ofstream scores(with_suffix(out, ".scores.csv"));
    scores << kScoreCsvHeader << '\n';
    for (const auto& r : report.rows) {
      write_score_row(scores, r);
      write_score_row(std::cout, r);
    }
  }
  return 0;
}

struct SelfsimArgs {
  std::string checkpoint;
  std::vector<std::size_t> ks{1, 4, 9, 16, 25};
  double sigma = 25.0;
  std::size_t seeds = 10;
  std::uint64_t seed = 0;
  std::size_t canvas = 160;
  std::size_t patch = 32;
  std::string layouts;
  std::string out;
};

std::vector<SelfsimRow> selfsim_from_layouts(const DenoiserNet<float>* net, const SelfsimArgs& a) {
  std::map<std::size_t, std::vector<AveragingResult>> by_k;
  const std::size_t channels = net ? net->config().in_channels : 0;
  for (const auto& png : list_pngs(a.layouts)) {
    const Image clean = read_png(png, channels);
    const auto layout = read_layout(with_suffix(png.parent_path() / png.stem(), ".layout"), clean);
    for (std::size_t s = 0; s < a.seeds; ++s) {
      Rng rng(a.seed + s);
      const Image noisy = add_awgn(clean, sigma_from_255(a.sigma), rng);
      by_k[layout.k()].push_back(average_recurring_patches(net ? denoise(*net, noisy) : noisy, layout));
    }
  }
  if (by_k.empty()) throw std::runtime_error("no layouts found in " + a.layouts);
  std::vector<SelfsimRow> rows;
  for (const auto& [k, results] : by_k) {
    SelfsimRow row{k};
    for (const auto& r : results) {
      row.psnr_before += r.psnr_before;
      row.psnr_after += r.psnr_after;
      row.ssim_before += r.ssim_before;
      row.ssim_after += r.ssim_after;
    }
    const double n = static_cast<double>(results.size());
    row.psnr_before /= n;
    row.psnr_after /= n;
    row.ssim_before /= n;
    row.ssim_after /= n;
    rows.push_back(row);
  }
  return rows;
}

int run_selfsim(const CLI::App* cmd, const SelfsimArgs& a) {
  std::optional<DenoiserNet<float>> net;
  if (!a.checkpoint.empty()) net = load_checkpoint(a.checkpoint);
  const DenoiserNet<float>* net_ptr = net ? &*net : nullptr;
  std::vector<SelfsimRow> rows;
  if (!a.layouts.empty()) {
    rows = selfsim_from_layouts(net_ptr, a);
  } else {
    SelfsimOptions opt;
    opt.ks = a.ks;
    opt.sigma = sigma_from_255(a.sigma);
    opt.seeds = a.seeds;
    opt.seed = a.seed;
    opt.layout = RecurrenceOptions{a.canvas, a.patch, net ? net->config().in_channels : 1};
    rows = selfsim_table(net_ptr, opt);
  }
  const fs::path out(a.out);
  ensure_parent(out);
  std::ofstream os(out);
  write_selfsim_csv(os, rows);
  write_selfsim_csv(std::cout, rows);
  write_snapshot(cmd, with_suffix(out, ".config.ini"));
  return 0;
}

struct EvalArgs {
  std::string restored;
  std::string clean;
  std::string out;
  double sigma = 0.0;
  std::size_t iters = 0;
  std::string mode = "none";
};

int run_eval(const CLI::App* cmd, const EvalArgs& a) {
  std::map<std::string, fs::path> restored, clean;
  for (const auto& p : list_pngs(a.restored)) restored[p.filename().string()] = p;
  for (const auto& p : list_pngs(a.clean)) clean[p.filename().string()] = p;
  std::vector<std::string> unmatched;
  for (const auto& [name, _] : restored)
    if (!clean.count(name)) unmatched.push_back(name + " (missing in " + a.clean + ")");
  for (const auto& [name, _] : clean)
    if (!restored.count(name)) unmatched.push_back(name + " (missing in " + a.restored + ")");
  if (!unmatched.empty()) {
    std::string msg = "unmatched files:";
    for (const auto& u : unmatched) msg += "\n  " + u;
    throw std::runtime_error(msg);
  }

  std::vector<ScoredPair> pairs;
  for (const auto& [name, path] : restored) {
    const Image c = read_png(clean.at(name));
    pairs.push_back({fs::path(name).stem().string(), read_png(path, c.channels), c});
  }
  const auto report = evaluate_corpus(pairs, ConditionTags{a.sigma, a.iters, a.mode});
  if (report.infinite_rows > 0)
    std::cerr << "warning: " << report.infinite_rows
              << " identical pair(s) scored inf dB and were left out of the PSNR mean\n";
  const fs::path out(a.out);
  ensure_parent(out);
  std::ofstream os(out);
  write_score_csv(os, report);
  write_score_row(std::cout, report.mean);
  write_snapshot(cmd, with_suffix(out, ".config.ini"), "psnr: rgb-joint mse over all channels");
  return 0;
}

struct SweepArgs {
  std::string checkpoint;
  std::string data;
  std::vector<std::size_t> iters{0, 10, 20, 40};
  double test_sigma = 25.0;
  double lr = 1e-5;
  NoiseOptions noise;
  std::string loss = "l2";
  std::uint64_t seed = 0;
  std::uint64_t noise_seed = 1000;
  std::string out;
};

int run_sweep(const CLI::App* cmd, SweepArgs a) {
  const auto net = load_checkpoint(a.checkpoint);
  std::vector<SweepImage> corpus;
  for (const auto& p : list_pngs(a.data))
    corpus.push_back({image_id(p), read_png(p, net.config().in_channels)});
  if (corpus.empty()) throw std::runtime_error("no PNG files in " + a.data);
  FinetuneConfig cfg;
  cfg.lr = a.lr;
  cfg.loss = parse_loss(a.loss);
  // Known-sigma mode fine-tunes at the test noise level unless --sigma is given.
  if (a.noise.kind == "gaussian" && cmd->count("--sigma") == 0) a.noise.sigma = a.test_sigma;
  cfg.noise = a.noise.spec();
  cfg.seed = a.seed;
  const std::string mode = noise_name(cfg.noise);
  const auto result = rfr_sweep(net, corpus, sigma_from_255(a.test_sigma), a.iters, cfg,
                                a.noise_seed, mode);

  const fs::path out(a.out);
  ensure_parent(out);
  std::ofstream os(out);
  os << kScoreCsvHeader << '\n';
  for (const auto& [m, report] : result.by_iters) {
    for (const auto& r : report.rows) write_score_row(os, r);
    write_score_row(os, report.mean);
    std::cout << "M=" << m << " psnr " << format_fixed(report.mean.psnr) << " ssim "
              << format_fixed(report.mean.ssim) << '\n';
  }
  write_snapshot(cmd, with_suffix(out, ".config.ini"));
  return 0;
}

void add_net_options(CLI::App* cmd, NetOptions& o) {
  cmd->add_option("--depth", o.depth, "Convolution layers")->capture_default_str();
  cmd->add_option("--width", o.width, "Hidden channels")->capture_default_str();
  cmd->add_option("--kernel", o.kernel, "Odd kernel size")->capture_default_str();
  cmd->add_option("--channels", o.channels, "Image channels (1 or 3)")
      ->check(CLI::IsMember({1, 3}))
      ->capture_default_str();
  cmd->add_option("--padding", o.padding)
      ->check(CLI::IsMember({"zero", "circular"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-time fine-tuning of a convolutional denoiser on its own restorations"};
  app.set_config("--config", "", "Read options from an INI file; command-line flags win");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a procedural PNG corpus");
  gen_cmd->add_option("--count", gen.count)->capture_default_str();
  gen_cmd->add_option("--size", gen.size, "Image side length; 0 picks 128 for texture, 160 for recurrence")->capture_default_str();
  gen_cmd->add_option("--kind", gen.kind)
      ->check(CLI::IsMember({"texture", "recurrence"}))
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--channels", gen.channels)->check(CLI::IsMember({1, 3}))->capture_default_str();
  gen_cmd->add_option("--motif", gen.motif, "Repeated patch side length")->capture_default_str();
  gen_cmd->add_option("--copies", gen.copies, "Motif copies per texture image")->capture_default_str();
  gen_cmd->add_option("--k", gen.k, "Copies per recurrence image (a square)")->capture_default_str();

  PretrainArgs pre;
  auto* pre_cmd = app.add_subcommand("pretrain", "Supervised blind-noise pre-training");
  pre_cmd->add_option("--data", pre.data, "Directory of clean PNGs")->required();
  pre_cmd->add_option("--out", pre.out, "Checkpoint path")->required();
  add_net_options(pre_cmd, pre.net);
  pre_cmd->add_option("--steps", pre.steps)->capture_default_str();
  pre_cmd->add_option("--epochs", pre.epochs, "Overrides --steps: passes over the corpus at --batch")
      ->capture_default_str();
  pre_cmd->add_option("--batch", pre.batch)->check(CLI::PositiveNumber)->capture_default_str();
  pre_cmd->add_option("--crop", pre.crop)->check(CLI::PositiveNumber)->capture_default_str();
  pre_cmd->add_option("--lr-start", pre.lr_start)->capture_default_str();
  pre_cmd->add_option("--lr-end", pre.lr_end)->capture_default_str();
  pre_cmd->add_option("--sigma-max", pre.sigma_max, "Noise levels drawn from [0, sigma-max]")
      ->capture_default_str();
  pre_cmd->add_option("--loss", pre.loss)->check(CLI::IsMember({"l1", "l2"}))->capture_default_str();
  pre_cmd->add_flag("--no-augment", pre.no_augment);
  pre_cmd->add_option("--seed", pre.seed)->capture_default_str();
  pre_cmd->add_option("--log-every", pre.log_every)->capture_default_str();

  DenoiseArgs den;
  auto* den_cmd = app.add_subcommand("denoise", "Run the network once");
  den_cmd->add_option("--checkpoint", den.checkpoint)->required();
  den_cmd->add_option("--input", den.input)->required();
  den_cmd->add_option("--output", den.output)->required();
  den_cmd->add_option("--clean", den.clean, "Reference image to score against");

  RfrArgs rfa;
  auto* rfr_cmd = app.add_subcommand("rfr", "Fine-tune on the input's own restoration, then denoise");
  rfr_cmd->add_option("--checkpoint", rfa.checkpoint)->required();
  rfr_cmd->add_option("--input", rfa.input)->required();
  rfr_cmd->add_option("--output", rfa.output)->required();
  rfr_cmd->add_option("--iters", rfa.iters)->capture_default_str();
  rfr_cmd->add_option("--lr", rfa.lr)->check(CLI::PositiveNumber)->capture_default_str();
  add_noise_options(rfr_cmd, rfa.noise);
  rfr_cmd->add_option("--loss", rfa.loss)->check(CLI::IsMember({"l1", "l2"}))->capture_default_str();
  rfr_cmd->add_option("--optimizer", rfa.optimizer)
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  rfr_cmd->add_flag("--no-augment", rfa.no_augment);
  rfr_cmd->add_option("--seed", rfa.seed)->capture_default_str();
  rfr_cmd->add_option("--clean", rfa.clean, "Reference image; writes baseline and fine-tuned scores");

  SelfsimArgs ss;
  auto* ss_cmd = app.add_subcommand("selfsim", "Average restored copies of a recurring patch");
  ss_cmd->add_option("--checkpoint", ss.checkpoint, "Without one, noisy copies are averaged");
  ss_cmd->add_option("--k", ss.ks, "Copy counts (squares)")->delimiter(',')->capture_default_str();
  ss_cmd->add_option("--sigma", ss.sigma)->capture_default_str();
  ss_cmd->add_option("--seeds", ss.seeds)->check(CLI::PositiveNumber)->capture_default_str();
  ss_cmd->add_option("--seed", ss.seed)->capture_default_str();
  ss_cmd->add_option("--canvas", ss.canvas)->capture_default_str();
  ss_cmd->add_option("--patch", ss.patch)->capture_default_str();
  ss_cmd->add_option("--layouts", ss.layouts, "Directory written by gen-data --kind recurrence");
  ss_cmd->add_option("--out", ss.out)->required();

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "Score restored PNGs against clean PNGs by filename");
  ev_cmd->add_option("--restored", ev.restored)->required();
  ev_cmd->add_option("--clean", ev.clean)->required();
  ev_cmd->add_option("--out", ev.out)->required();
  ev_cmd->add_option("--sigma", ev.sigma, "Tag written to the sigma_255 column")->capture_default_str();
  ev_cmd->add_option("--iters", ev.iters, "Tag written to the M column")->capture_default_str();
  ev_cmd->add_option("--mode", ev.mode, "Tag written to the mode column")->capture_default_str();

  SweepArgs sw;
  auto* sw_cmd = app.add_subcommand("sweep", "Score a corpus at several fine-tuning lengths");
  sw_cmd->add_option("--checkpoint", sw.checkpoint)->required();
  sw_cmd->add_option("--data", sw.data, "Directory of clean PNGs")->required();
  sw_cmd->add_option("--iters", sw.iters)->delimiter(',')->capture_default_str();
  sw_cmd->add_option("--test-sigma", sw.test_sigma, "AWGN level of the test inputs (0-255)")
      ->capture_default_str();
  sw_cmd->add_option("--lr", sw.lr)->check(CLI::PositiveNumber)->capture_default_str();
  add_noise_options(sw_cmd, sw.noise);
  sw_cmd->add_option("--loss", sw.loss)->check(CLI::IsMember({"l1", "l2"}))->capture_default_str();
  sw_cmd->add_option("--seed", sw.seed)->capture_default_str();
  sw_cmd->add_option("--noise-seed", sw.noise_seed)->capture_default_str();
  sw_cmd->add_option("--out", sw.out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return run_gen_data(gen_cmd, gen);
    if (*pre_cmd) return run_pretrain(pre_cmd, pre);
    if (*den_cmd) return run_denoise(den);
    if (*rfr_cmd) return run_rfr(rfr_cmd, rfa);
    if (*ss_cmd) return run_selfsim(ss_cmd, ss);
    if (*ev_cmd) return run_eval(ev_cmd, ev);
    if (*sw_cmd) return run_sweep(sw_cmd, sw);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
