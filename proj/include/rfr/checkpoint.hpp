#ifndef RFR_CHECKPOINT_HPP
#define RFR_CHECKPOINT_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfr/net.hpp"

// Checkpoint layout (little-endian):
//   "RFRD" | u32 version | u32 depth | u32 width | u32 kernel | u32 in_channels
//   | u8 padding | u8 residual | per layer: f32 weights (out, in, row, col), f32 biases

namespace rfr {

inline constexpr std::array<char, 4> kCheckpointMagic{'R', 'F', 'R', 'D'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, version_mismatch, truncated_payload, bad_config, trailing_data };

  CheckpointError(Kind kind, const std::string& detail)
      : std::runtime_error(describe(kind) + (detail.empty() ? "" : ": " + detail)),
        kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

  static std::string describe(Kind kind) {
    switch (kind) {
      case Kind::io: return "i/o error";
      case Kind::bad_magic: return "bad magic";
      case Kind::version_mismatch: return "version mismatch";
      case Kind::truncated_payload: return "truncated payload";
      case Kind::bad_config: return "bad config";
      case Kind::trailing_data: return "trailing data";
    }
    return "checkpoint error";
  }

 private:
  Kind kind_;
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const noexcept { return bytes_.size() - pos_ >= n; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

 private:
  void need(std::size_t n, const char* what) const {
    if (!has(n))
      throw CheckpointError(CheckpointError::Kind::truncated_payload,
                            std::string("while reading ") + what);
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> serialize_checkpoint(const DenoiserNet<float>& net) {
  const NetConfig& cfg = net.config();
  std::vector<std::uint8_t> out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, cfg.depth);
  detail::put_u32(out, cfg.width);
  detail::put_u32(out, cfg.kernel);
  detail::put_u32(out, cfg.in_channels);
  out.push_back(static_cast<std::uint8_t>(cfg.padding));
  out.push_back(cfg.residual ? 1 : 0);
  out.reserve(out.size() + 4 * net.parameter_count());
  for (const auto& layer : net.layers()) {
    for (float w : layer.weight) detail::put_u32(out, std::bit_cast<std::uint32_t>(w));
    for (float b : layer.bias) detail::put_u32(out, std::bit_cast<std::uint32_t>(b));
  }
  return out;
}

inline DenoiserNet<float> deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  using Kind = CheckpointError::Kind;
  if (bytes.size() < kCheckpointMagic.size() ||
      !std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), bytes.begin()))
    throw CheckpointError(Kind::bad_magic, "expected \"RFRD\"");

  std::vector<std::uint8_t> body(bytes.begin() + 4, bytes.end());
  detail::ByteReader in(body);
  const std::uint32_t version = in.u32("version");
  if (version != kCheckpointVersion)
    throw CheckpointError(Kind::version_mismatch, "file has version " + std::to_string(version) +
                                                      ", reader supports " +
                                                      std::to_string(kCheckpointVersion));
  NetConfig cfg;
  cfg.depth = in.u32("depth");
  cfg.width = in.u32("width");
  cfg.kernel = in.u32("kernel");
  cfg.in_channels = in.u32("in_channels");
  const std::uint8_t padding = in.u8("padding");
  const std::uint8_t residual = in.u8("residual");
  if (padding > 1 || residual > 1)
    throw CheckpointError(Kind::bad_config, "padding/residual flag out of range");
  cfg.padding = static_cast<PaddingMode>(padding);
  cfg.residual = residual == 1;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(Kind::bad_config, e.what());
  }

  DenoiserNet<float> net(cfg);
  if (in.remaining() < 4 * net.parameter_count())
    throw CheckpointError(Kind::truncated_payload,
                          "expected " + std::to_string(4 * net.parameter_count()) +
                              " parameter bytes, found " + std::to_string(in.remaining()));
  for (auto& layer : net.layers()) {
    for (float& w : layer.weight) w = in.f32("weights");
    for (float& b : layer.bias) b = in.f32("biases");
  }
  if (in.remaining() != 0)
    throw CheckpointError(Kind::trailing_data,
                          std::to_string(in.remaining()) + " bytes after parameters");
  return net;
}

inline void save_checkpoint(const DenoiserNet<float>& net, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(net);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError(CheckpointError::Kind::io, "cannot open " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw CheckpointError(CheckpointError::Kind::io, "cannot write " + path.string());
}

inline DenoiserNet<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError(CheckpointError::Kind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace rfr

#endif  // RFR_CHECKPOINT_HPP
