#ifndef RFR_PNG_IO_HPP
#define RFR_PNG_IO_HPP

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfr/image.hpp"

namespace rfr {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

/// Reads an 8-bit PNG as grayscale or RGB (whichever the file holds), or
/// converted to `force_channels` when it is 1 or 3. Samples become byte/255.
inline Image read_png(const std::filesystem::path& path, std::size_t force_channels = 0) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    throw ImageIoError("cannot read " + path.string() + ": " + png.message);

  std::size_t channels = (png.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  if (force_channels == 1 || force_channels == 3) channels = force_channels;
  png.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw ImageIoError("cannot decode " + path.string() + ": " + msg);
  }

  Image img(png.height, png.width, channels);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < channels; ++c)
        img.at(y, x, c) = static_cast<float>(buffer[(y * img.width + x) * channels + c]) / 255.0f;
  return img;
}

/// Writes an 8-bit PNG; samples are clamped to [0, 1] and rounded.
inline void write_png(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw ImageIoError("write_png: only 1 or 3 channels are supported");
  std::vector<std::uint8_t> buffer(img.height * img.width * img.channels);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < img.channels; ++c)
        buffer[(y * img.width + x) * img.channels + c] = to_byte(img.at(y, x, c));

  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, buffer.data(), 0, nullptr))
    throw ImageIoError("cannot write " + path.string() + ": " + png.message);
}

/// The image as it would come back from a PNG round trip.
inline Image quantize8(Image img) {
  for (float& v : img.data) v = static_cast<float>(to_byte(v)) / 255.0f;
  return img;
}

}  // namespace rfr

#endif  // RFR_PNG_IO_HPP
