#ifndef RFR_IMAGE_HPP
#define RFR_IMAGE_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfr/tensor.hpp"

namespace rfr {

/// A single height x width x channels image with float samples nominally in
/// [0, 1]. Samples are stored channel-planar (c, y, x) so that conversion to
/// a 1 x C x H x W tensor is a copy.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(std::size_t h, std::size_t w, std::size_t c, float fill = 0.0f)
      : height(h), width(w), channels(c), data(h * w * c, fill) {}

  std::size_t size() const noexcept { return data.size(); }
  bool empty() const noexcept { return data.empty(); }

  float& at(std::size_t y, std::size_t x, std::size_t c = 0) noexcept {
    return data[(c * height + y) * width + x];
  }
  float at(std::size_t y, std::size_t x, std::size_t c = 0) const noexcept {
    return data[(c * height + y) * width + x];
  }

  bool same_geometry(const Image& other) const noexcept {
    return height == other.height && width == other.width && channels == other.channels;
  }

  bool operator==(const Image&) const = default;
};

inline void check_same_geometry(const Image& a, const Image& b, const std::string& where) {
  if (a.channels != b.channels) throw ShapeError("c", a.channels, b.channels, where);
  if (a.height != b.height) throw ShapeError("h", a.height, b.height, where);
  if (a.width != b.width) throw ShapeError("w", a.width, b.width, where);
}

template <typename T = float>
Tensor<T> to_tensor(const Image& img) {
  Tensor<T> t(Shape{1, img.channels, img.height, img.width});
  std::transform(img.data.begin(), img.data.end(), t.data().begin(),
                 [](float v) { return static_cast<T>(v); });
  return t;
}

template <typename T>
Image to_image(const Tensor<T>& t, std::size_t n = 0) {
  const Shape& s = t.shape();
  Image img(s.h, s.w, s.c);
  const auto src = t.sample(n);
  std::transform(src.begin(), src.end(), img.data.begin(),
                 [](T v) { return static_cast<float>(v); });
  return img;
}

inline Image crop(const Image& img, std::size_t y0, std::size_t x0, std::size_t h,
                  std::size_t w) {
  if (y0 + h > img.height || x0 + w > img.width)
    throw std::out_of_range("crop: region exceeds image bounds");
  Image out(h, w, img.channels);
  for (std::size_t c = 0; c < img.channels; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
  return out;
}

/// Copies `patch` into `dst` with its top-left corner at (y0, x0).
inline void stamp(Image& dst, const Image& patch, std::size_t y0, std::size_t x0) {
  if (patch.channels != dst.channels)
    throw ShapeError("c", dst.channels, patch.channels, "stamp");
  if (y0 + patch.height > dst.height || x0 + patch.width > dst.width)
    throw std::out_of_range("stamp: patch exceeds canvas bounds");
  for (std::size_t c = 0; c < dst.channels; ++c)
    for (std::size_t y = 0; y < patch.height; ++y)
      for (std::size_t x = 0; x < patch.width; ++x)
        dst.at(y0 + y, x0 + x, c) = patch.at(y, x, c);
}

inline Image clamp01(Image img) {
  for (float& v : img.data) v = std::clamp(v, 0.0f, 1.0f);
  return img;
}

/// Circular shift: out(y, x) = img(y - dy, x - dx) modulo the image size.
inline Image shift_circular(const Image& img, std::ptrdiff_t dy, std::ptrdiff_t dx) {
  Image out(img.height, img.width, img.channels);
  const auto H = static_cast<std::ptrdiff_t>(img.height);
  const auto W = static_cast<std::ptrdiff_t>(img.width);
  for (std::size_t c = 0; c < img.channels; ++c)
    for (std::ptrdiff_t y = 0; y < H; ++y)
      for (std::ptrdiff_t x = 0; x < W; ++x)
        out.at(static_cast<std::size_t>(detail::wrap(y + dy, H)),
               static_cast<std::size_t>(detail::wrap(x + dx, W)), c) =
            img.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c);
  return out;
}

/// The eight symmetries of the pixel grid. Bit 0 flips horizontally, bit 1
/// flips vertically, bit 2 transposes (applied last).
enum class Dihedral : unsigned {
  identity = 0,
  flip_x = 1,
  flip_y = 2,
  rotate_180 = 3,
  transpose = 4,
  rotate_90 = 5,
  rotate_270 = 6,
  anti_transpose = 7,
};

inline constexpr unsigned kDihedralCount = 8;

inline Image apply(Dihedral t, const Image& img) {
  const auto code = static_cast<unsigned>(t);
  const bool fx = code & 1u;
  const bool fy = code & 2u;
  const bool tr = code & 4u;
  const std::size_t H = img.height;
  const std::size_t W = img.width;
  Image out = tr ? Image(W, H, img.channels) : Image(H, W, img.channels);
  for (std::size_t c = 0; c < img.channels; ++c)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x) {
        const std::size_t sy = fy ? H - 1 - y : y;
        const std::size_t sx = fx ? W - 1 - x : x;
        if (tr)
          out.at(x, y, c) = img.at(sy, sx, c);
        else
          out.at(y, x, c) = img.at(sy, sx, c);
      }
  return out;
}

inline Dihedral inverse(Dihedral t) {
  // Flips are involutions and commute with each other; with a transpose the
  // two flip axes swap.
  const auto code = static_cast<unsigned>(t);
  if (!(code & 4u)) return t;
  const unsigned fx = code & 1u;
  const unsigned fy = (code & 2u) >> 1;
  return static_cast<Dihedral>(4u | (fx << 1) | fy);
}

}  // namespace rfr

#endif  // RFR_IMAGE_HPP
