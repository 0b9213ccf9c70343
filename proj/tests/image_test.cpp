#include <gtest/gtest.h>

#include <set>

#include "rfr/image.hpp"
#include "rfr/png_io.hpp"
#include "rfr/texture.hpp"

namespace rfr {
namespace {

Image ramp(std::size_t h, std::size_t w, std::size_t c) {
  Image img(h, w, c);
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = static_cast<float>(i);
  return img;
}

TEST(Dihedral, InverseUndoesEveryTransform) {
  const Image img = ramp(5, 7, 2);
  for (unsigned code = 0; code < kDihedralCount; ++code) {
    const auto t = static_cast<Dihedral>(code);
    EXPECT_EQ(apply(inverse(t), apply(t, img)), img) << "code " << code;
  }
}

TEST(Dihedral, EightDistinctImages) {
  const Image img = ramp(4, 4, 1);
  std::set<std::vector<float>> seen;
  for (unsigned code = 0; code < kDihedralCount; ++code)
    seen.insert(apply(static_cast<Dihedral>(code), img).data);
  EXPECT_EQ(seen.size(), 8u);
}

TEST(Dihedral, TransposeSwapsAxes) {
  const Image img = ramp(3, 5, 1);
  const Image t = apply(Dihedral::transpose, img);
  EXPECT_EQ(t.height, 5u);
  EXPECT_EQ(t.width, 3u);
  EXPECT_EQ(t.at(4, 1), img.at(1, 4));
  const Image r = apply(Dihedral::rotate_180, img);
  EXPECT_EQ(r.at(0, 0), img.at(2, 4));
}

TEST(ShiftCircular, WrapsAndComposes) {
  const Image img = ramp(6, 9, 1);
  const Image s = shift_circular(img, 2, -3);
  EXPECT_EQ(s.at(2, 6), img.at(0, 0));
  EXPECT_EQ(shift_circular(s, -2, 3), img);
  EXPECT_EQ(shift_circular(img, 6, 9), img);
}

TEST(CropStamp, RoundTrip) {
  Image canvas(10, 10, 1, 0.0f);
  const Image patch = ramp(3, 4, 1);
  stamp(canvas, patch, 2, 5);
  EXPECT_EQ(crop(canvas, 2, 5, 3, 4), patch);
  EXPECT_THROW(crop(canvas, 8, 8, 3, 3), std::out_of_range);
}

TEST(TensorBridge, RoundTrip) {
  const Image img = generate_texture(9, 11, 3, 1);
  EXPECT_EQ(to_image(to_tensor(img)), img);
}

TEST(Texture, DeterministicAndInRange) {
  const Image a = generate_texture(48, 40, 3, 5);
  EXPECT_EQ(a, generate_texture(48, 40, 3, 5));
  EXPECT_NE(a, generate_texture(48, 40, 3, 6));
  for (float v : a.data) {
    EXPECT_GE(v, 0.05f - 1e-6f);
    EXPECT_LE(v, 0.95f + 1e-6f);
  }
}

// Counts top-left corners whose 32x32 window equals the motif exactly after
// 8-bit quantisation, scanning every offset.
std::size_t count_exact_copies(const Image& img, const Image& motif) {
  const Image q = quantize8(img);
  const Image m = quantize8(motif);
  std::size_t found = 0;
  for (std::size_t y = 0; y + m.height <= q.height; ++y)
    for (std::size_t x = 0; x + m.width <= q.width; ++x)
      if (crop(q, y, x, m.height, m.width) == m) ++found;
  return found;
}

TEST(MotifTexture, CarriesExactRepetitions) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto t = generate_motif_texture(128, 128, 1, seed);
    EXPECT_GE(count_exact_copies(t.image, t.motif), 4u) << "seed " << seed;
    for (std::size_t i = 0; i < t.positions.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(overlaps(t.positions[i], t.positions[j], 32));
  }
}

TEST(MotifTexture, TooManyCopiesRejected) {
  EXPECT_THROW(generate_motif_texture(64, 64, 1, 0, 32, 5), std::invalid_argument);
}

TEST(Png, WriteReadMatchesQuantised) {
  const Image img = generate_texture(17, 23, 3, 3);
  const auto path = std::filesystem::temp_directory_path() / "rfr_image_test.png";
  write_png(path, img);
  const Image back = read_png(path);
  EXPECT_EQ(back, quantize8(img));
  EXPECT_EQ(read_png(path, 1).channels, 1u);
  EXPECT_THROW(read_png(path.string() + ".missing"), ImageIoError);
}

}  // namespace
}  // namespace rfr
