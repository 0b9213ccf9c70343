#include <gtest/gtest.h>

#include "rfr/noise.hpp"
#include "rfr/selfsim.hpp"

namespace rfr {
namespace {

TEST(GridPositions, CentredAndDisjoint) {
  const auto pos = grid_positions(160, 160, 32, 25);
  ASSERT_EQ(pos.size(), 25u);
  EXPECT_EQ(pos[0].x, 0u);
  EXPECT_EQ(pos[0].y, 0u);
  EXPECT_EQ(grid_positions(160, 160, 32, 1)[0].x, 64u);
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(overlaps(pos[i], pos[j], 32));
}

TEST(GridPositions, RejectsNonSquareAndOverfull) {
  EXPECT_THROW(grid_positions(160, 160, 32, 5), LayoutError);
  EXPECT_THROW(grid_positions(160, 160, 32, 36), LayoutError);
}

TEST(Layout, OverlapIsReported) {
  RecurrenceLayout layout{Image(8, 8, 1), {{0, 0}, {4, 4}}, Image(32, 32, 1)};
  try {
    layout.validate();
    FAIL();
  } catch (const LayoutError& e) {
    EXPECT_NE(std::string(e.what()).find("overlap"), std::string::npos);
  }
  layout.positions = {{30, 0}};
  EXPECT_THROW(layout.validate(), LayoutError);
}

TEST(Layout, CopiesAreVerbatim) {
  const auto layout = make_grid_layout(9, 3);
  const Image img = make_recurrence_image(layout);
  for (const Image& p : extract_patches(img, layout)) EXPECT_EQ(p, layout.patch);
  EXPECT_EQ(make_grid_layout(9, 3).canvas, layout.canvas);
}

TEST(Averaging, CleanInputIsExact) {
  const auto layout = make_grid_layout(4, 1);
  const auto r = average_recurring_patches(make_recurrence_image(layout), layout);
  EXPECT_EQ(r.average, layout.patch);
  EXPECT_TRUE(is_infinite_psnr(r.psnr_after));
  EXPECT_EQ(r.ssim_after, 1.0);
}

TEST(Averaging, SingleCopyBeforeEqualsAfter) {
  const auto layout = make_grid_layout(1, 2);
  Rng rng(2);
  const Image noisy = add_awgn(make_recurrence_image(layout), 0.1, rng);
  const auto r = average_recurring_patches(noisy, layout);
  EXPECT_DOUBLE_EQ(r.psnr_before, r.psnr_after);
  EXPECT_DOUBLE_EQ(r.ssim_before, r.ssim_after);
}

TEST(Averaging, NoisyCopiesGainAboutTenLogK) {
  for (std::size_t k : {4u, 16u}) {
    const auto layout = make_grid_layout(k, 5);
    Rng rng(k);
    const Image noisy = add_awgn(make_recurrence_image(layout), sigma_from_255(25), rng);
    const auto r = average_recurring_patches(noisy, layout);
    EXPECT_NEAR(r.psnr_after - r.psnr_before, 10.0 * std::log10(static_cast<double>(k)), 0.5)
        << "k=" << k;
    EXPECT_GT(r.ssim_after, r.ssim_before);
  }
}

TEST(Equivariance, CircularPaddingIsExactForAnyShift) {
  const auto net = init_net<float>(NetConfig{.depth = 4, .width = 8, .padding = PaddingMode::circular}, 3);
  const Image img = generate_texture(40, 36, 1, 4);
  for (const auto& d : equivariance_report(net, img, {{1, 0}, {0, 3}, {-5, 7}, {13, -2}})) {
    EXPECT_LE(d.max_deviation, 1e-5) << d.dy << "," << d.dx;
    EXPECT_EQ(d.compared, img.size());
  }
}

TEST(Equivariance, ZeroPaddingInteriorMatches) {
  const auto net = init_net<float>(NetConfig{.depth = 4, .width = 8}, 3);
  const Image img = generate_texture(48, 48, 1, 5);
  for (const auto& d : equivariance_report(net, img, {{2, 0}, {0, -3}, {4, 5}})) {
    EXPECT_LE(d.max_deviation, 1e-4);
    EXPECT_GT(d.compared, 0u);
  }
}

TEST(Equivariance, ZeroPaddingBordersDoDiffer) {
  // Guards the test above: comparing the full frame must expose the border.
  const auto net = init_net<float>(NetConfig{.depth = 4, .width = 8}, 3);
  const Image img = generate_texture(48, 48, 1, 5);
  const Image a = denoise(net, img);
  const Image b = shift_circular(denoise(net, shift_circular(img, 4, 5)), -4, -5);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(double(a.data[i]) - b.data[i]));
  EXPECT_GT(worst, 1e-3);
}

TEST(Spread, IdenticalPatchesHaveZeroSpread) {
  const Image p = generate_motif(16, 1, 2);
  const auto r = patch_spread({p, p, p});
  EXPECT_EQ(r.max_pairwise, 0.0);
  EXPECT_EQ(r.mean_rms_to_mean, 0.0);
}

TEST(Spread, ReportCoversEveryCopy) {
  const auto net = init_net<float>(NetConfig{.depth = 3, .width = 4}, 1);
  const auto layout = make_grid_layout(4, 6);
  const auto r = output_spread(net, layout, make_recurrence_image(layout));
  EXPECT_EQ(r.locations.size(), 4u);
  EXPECT_GE(r.max_pairwise, r.mean_rms_to_mean);
}

}  // namespace
}  // namespace rfr
