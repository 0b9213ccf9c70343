#ifndef RFR_TENSOR_HPP
#define RFR_TENSOR_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rfr/parallel.hpp"

namespace rfr {

/// Raised when two operands disagree on a dimension. `dimension()` names it
/// ("n", "c", "h", "w", "in_ch", "numel", ...).
class ShapeError : public std::invalid_argument {
 public:
  ShapeError(std::string dimension, std::size_t expected, std::size_t actual,
             const std::string& where)
      : std::invalid_argument(where + ": mismatched dimension '" + dimension +
                              "' (expected " + std::to_string(expected) +
                              ", got " + std::to_string(actual) + ")"),
        dimension_(std::move(dimension)),
        expected_(expected),
        actual_(actual) {}

  const std::string& dimension() const noexcept { return dimension_; }
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::string dimension_;
  std::size_t expected_;
  std::size_t actual_;
};

enum class PaddingMode : std::uint8_t { zero = 0, circular = 1 };

struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t numel() const noexcept { return n * c * h * w; }
  std::size_t plane() const noexcept { return h * w; }
  bool operator==(const Shape&) const = default;
};

inline void check_same_shape(const Shape& expected, const Shape& actual,
                             const std::string& where) {
  if (expected.n != actual.n) throw ShapeError("n", expected.n, actual.n, where);
  if (expected.c != actual.c) throw ShapeError("c", expected.c, actual.c, where);
  if (expected.h != actual.h) throw ShapeError("h", expected.h, actual.h, where);
  if (expected.w != actual.w) throw ShapeError("w", expected.w, actual.w, where);
}

/// Dense N x C x H x W array, row-major. The gradient buffer is optional and
/// absent until requested.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(shape), data_(shape.numel(), fill) {}
  Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.numel())
      throw ShapeError("numel", shape_.numel(), data_.size(), "Tensor");
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t numel() const noexcept { return data_.size(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) noexcept {
    return data_[index(n, c, y, x)];
  }
  T at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return data_[index(n, c, y, x)];
  }

  /// Channel-major block of sample `n` (c*h*w values).
  std::span<T> sample(std::size_t n) noexcept {
    const std::size_t len = shape_.c * shape_.plane();
    return std::span<T>(data_).subspan(n * len, len);
  }
  std::span<const T> sample(std::size_t n) const noexcept {
    const std::size_t len = shape_.c * shape_.plane();
    return std::span<const T>(data_).subspan(n * len, len);
  }

  bool has_grad() const noexcept { return !grad_.empty() || numel() == 0; }
  void ensure_grad() {
    if (grad_.size() != data_.size()) grad_.assign(data_.size(), T(0));
  }
  void zero_grad() { grad_.assign(data_.size(), T(0)); }
  void drop_grad() noexcept { grad_ = {}; }
  std::span<T> grad() noexcept { return grad_; }
  std::span<const T> grad() const noexcept { return grad_; }

 private:
  std::size_t index(std::size_t n, std::size_t c, std::size_t y,
                    std::size_t x) const noexcept {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  Shape shape_;
  std::vector<T> data_;
  std::vector<T> grad_;
};

/// Weights of one square, odd-sized, "same" convolution. Weight layout is
/// out_ch x in_ch x k x k.
template <typename T>
struct ConvParams {
  std::size_t out_ch = 0;
  std::size_t in_ch = 0;
  std::size_t kernel = 1;
  std::vector<T> weight;
  std::vector<T> bias;
  std::vector<T> weight_grad;
  std::vector<T> bias_grad;

  ConvParams() = default;
  ConvParams(std::size_t out_channels, std::size_t in_channels, std::size_t k)
      : out_ch(out_channels),
        in_ch(in_channels),
        kernel(k),
        weight(out_channels * in_channels * k * k, T(0)),
        bias(out_channels, T(0)),
        weight_grad(weight.size(), T(0)),
        bias_grad(out_channels, T(0)) {
    if (k == 0 || k % 2 == 0)
      throw std::invalid_argument("ConvParams: kernel must be odd, got " +
                                  std::to_string(k));
    if (out_channels == 0 || in_channels == 0)
      throw std::invalid_argument("ConvParams: channel counts must be positive");
  }

  std::size_t fan_in() const noexcept { return in_ch * kernel * kernel; }

  T& w(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) noexcept {
    return weight[((o * in_ch + i) * kernel + ky) * kernel + kx];
  }
  T w(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const noexcept {
    return weight[((o * in_ch + i) * kernel + ky) * kernel + kx];
  }

  void zero_grad() {
    std::fill(weight_grad.begin(), weight_grad.end(), T(0));
    std::fill(bias_grad.begin(), bias_grad.end(), T(0));
  }

  template <typename U>
  ConvParams<U> cast() const {
    ConvParams<U> out(out_ch, in_ch, kernel);
    std::transform(weight.begin(), weight.end(), out.weight.begin(),
                   [](T v) { return static_cast<U>(v); });
    std::transform(bias.begin(), bias.end(), out.bias.begin(),
                   [](T v) { return static_cast<U>(v); });
    return out;
  }
};

namespace detail {

template <typename T>
using RowMajorMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMajorMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix<T>>;

inline std::ptrdiff_t wrap(std::ptrdiff_t i, std::ptrdiff_t n) noexcept {
  const std::ptrdiff_t r = i % n;
  return r < 0 ? r + n : r;
}

/// Unfolds a C x H x W block into a (C*k*k) x (H*W) row-major matrix. Row
/// index is (c*k + ky)*k + kx, column index y*W + x.
template <typename T>
void im2col(std::span<const T> src, std::size_t channels, std::size_t h, std::size_t w,
            std::size_t k, PaddingMode pad, T* cols) {
  const auto half = static_cast<std::ptrdiff_t>(k / 2);
  const auto H = static_cast<std::ptrdiff_t>(h);
  const auto W = static_cast<std::ptrdiff_t>(w);
  for (std::size_t c = 0; c < channels; ++c) {
    const T* plane = src.data() + c * h * w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* row = cols + ((c * k + ky) * k + kx) * h * w;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - half;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - half;
        for (std::ptrdiff_t y = 0; y < H; ++y) {
          T* out = row + y * W;
          std::ptrdiff_t sy = y + dy;
          if (pad == PaddingMode::zero) {
            if (sy < 0 || sy >= H) {
              std::fill(out, out + W, T(0));
              continue;
            }
            const T* in = plane + sy * W;
            const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx);
            const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(W, W - dx);
            for (std::ptrdiff_t x = 0; x < x0; ++x) out[x] = T(0);
            for (std::ptrdiff_t x = x0; x < x1; ++x) out[x] = in[x + dx];
            for (std::ptrdiff_t x = std::max(x0, x1); x < W; ++x) out[x] = T(0);
          } else {
            sy = wrap(sy, H);
            const T* in = plane + sy * W;
            for (std::ptrdiff_t x = 0; x < W; ++x) out[x] = in[wrap(x + dx, W)];
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatters-and-adds columns back into a C x H x W block
/// (which the caller zeroes).
template <typename T>
void col2im(const T* cols, std::size_t channels, std::size_t h, std::size_t w,
            std::size_t k, PaddingMode pad, std::span<T> dst) {
  const auto half = static_cast<std::ptrdiff_t>(k / 2);
  const auto H = static_cast<std::ptrdiff_t>(h);
  const auto W = static_cast<std::ptrdiff_t>(w);
  for (std::size_t c = 0; c < channels; ++c) {
    T* plane = dst.data() + c * h * w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* row = cols + ((c * k + ky) * k + kx) * h * w;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - half;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - half;
        for (std::ptrdiff_t y = 0; y < H; ++y) {
          const T* in = row + y * W;
          std::ptrdiff_t sy = y + dy;
          if (pad == PaddingMode::zero) {
            if (sy < 0 || sy >= H) continue;
            T* out = plane + sy * W;
            const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx);
            const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(W, W - dx);
            for (std::ptrdiff_t x = x0; x < x1; ++x) out[x + dx] += in[x];
          } else {
            sy = wrap(sy, H);
            T* out = plane + sy * W;
            for (std::ptrdiff_t x = 0; x < W; ++x) out[wrap(x + dx, W)] += in[x];
          }
        }
      }
    }
  }
}

}  // namespace detail

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvParams<T>& params,
                         PaddingMode padding) {
  const Shape& s = input.shape();
  if (s.c != params.in_ch) throw ShapeError("in_ch", params.in_ch, s.c, "conv2d_forward");

  Tensor<T> out(Shape{s.n, params.out_ch, s.h, s.w});
  const std::size_t K = params.fan_in();
  const std::size_t P = s.plane();
  const auto weights = detail::ConstMatrixMap<T>(params.weight.data(),
                                                 static_cast<Eigen::Index>(params.out_ch),
                                                 static_cast<Eigen::Index>(K));
  parallel_for(s.n, [&](std::size_t n) {
    std::vector<T> cols(K * P);
    detail::im2col(input.sample(n), s.c, s.h, s.w, params.kernel, padding, cols.data());
    detail::MatrixMap<T> y(out.sample(n).data(), static_cast<Eigen::Index>(params.out_ch),
                           static_cast<Eigen::Index>(P));
    y.noalias() = weights * detail::ConstMatrixMap<T>(cols.data(),
                                                      static_cast<Eigen::Index>(K),
                                                      static_cast<Eigen::Index>(P));
    for (std::size_t o = 0; o < params.out_ch; ++o)
      y.row(static_cast<Eigen::Index>(o)).array() += params.bias[o];
  });
  return out;
}

/// Backward pass of conv2d_forward. Adds into params.weight_grad and
/// params.bias_grad; returns the gradient w.r.t. the input when
/// `want_input_grad`, otherwise an empty tensor. Per-sample contributions are
/// summed in sample order whatever the thread count.
template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& input, ConvParams<T>& params,
                          const Tensor<T>& grad_out, PaddingMode padding,
                          bool want_input_grad = true) {
  const Shape& s = input.shape();
  if (s.c != params.in_ch) throw ShapeError("in_ch", params.in_ch, s.c, "conv2d_backward");
  check_same_shape(Shape{s.n, params.out_ch, s.h, s.w}, grad_out.shape(), "conv2d_backward");

  const std::size_t K = params.fan_in();
  const std::size_t P = s.plane();
  const auto O = static_cast<Eigen::Index>(params.out_ch);
  const auto weights =
      detail::ConstMatrixMap<T>(params.weight.data(), O, static_cast<Eigen::Index>(K));

  Tensor<T> grad_in;
  if (want_input_grad) grad_in = Tensor<T>(s);

  std::vector<std::vector<T>> partial_w(s.n, std::vector<T>(params.weight.size()));
  std::vector<std::vector<T>> partial_b(s.n, std::vector<T>(params.out_ch));

  parallel_for(s.n, [&](std::size_t n) {
    std::vector<T> cols(K * P);
    detail::im2col(input.sample(n), s.c, s.h, s.w, params.kernel, padding, cols.data());
    const auto g = detail::ConstMatrixMap<T>(grad_out.sample(n).data(), O,
                                             static_cast<Eigen::Index>(P));
    auto colmat = detail::MatrixMap<T>(cols.data(), static_cast<Eigen::Index>(K),
                                       static_cast<Eigen::Index>(P));
    detail::MatrixMap<T>(partial_w[n].data(), O, static_cast<Eigen::Index>(K)).noalias() =
        g * colmat.transpose();
    for (std::size_t o = 0; o < params.out_ch; ++o) {
      T acc = T(0);
      const T* row = grad_out.sample(n).data() + o * P;
      for (std::size_t i = 0; i < P; ++i) acc += row[i];
      partial_b[n][o] = acc;
    }
    if (want_input_grad) {
      colmat.noalias() = weights.transpose() * g;
      detail::col2im(cols.data(), s.c, s.h, s.w, params.kernel, padding, grad_in.sample(n));
    }
  });

  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t i = 0; i < params.weight_grad.size(); ++i)
      params.weight_grad[i] += partial_w[n][i];
    for (std::size_t o = 0; o < params.out_ch; ++o) params.bias_grad[o] += partial_b[n][o];
  }
  return grad_in;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  auto src = input.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > T(0) ? src[i] : T(0);
  return out;
}

/// Subgradient 0 at exactly zero.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out) {
  check_same_shape(input.shape(), grad_out.shape(), "relu_backward");
  Tensor<T> out(input.shape());
  auto x = input.data();
  auto g = grad_out.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = x[i] > T(0) ? g[i] : T(0);
  return out;
}

enum class LossKind : std::uint8_t { l2 = 0, l1 = 1 };

template <typename T>
struct LossResult {
  T loss = T(0);
  Tensor<T> grad;
};

/// Mean squared error over every element, with d(loss)/d(pred).
template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  check_same_shape(target.shape(), pred.shape(), "mse_loss");
  LossResult<T> r{T(0), Tensor<T>(pred.shape())};
  const auto p = pred.data();
  const auto t = target.data();
  auto g = r.grad.data();
  const double inv_n = p.empty() ? 0.0 : 1.0 / static_cast<double>(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
    acc += d * d;
    g[i] = static_cast<T>(2.0 * d * inv_n);
  }
  r.loss = static_cast<T>(acc * inv_n);
  return r;
}

/// Mean absolute error; the subgradient is 0 where pred == target.
template <typename T>
LossResult<T> l1_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  check_same_shape(target.shape(), pred.shape(), "l1_loss");
  LossResult<T> r{T(0), Tensor<T>(pred.shape())};
  const auto p = pred.data();
  const auto t = target.data();
  auto g = r.grad.data();
  const double inv_n = p.empty() ? 0.0 : 1.0 / static_cast<double>(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
    acc += std::abs(d);
    g[i] = static_cast<T>(d > 0 ? inv_n : (d < 0 ? -inv_n : 0.0));
  }
  r.loss = static_cast<T>(acc * inv_n);
  return r;
}

template <typename T>
LossResult<T> compute_loss(LossKind kind, const Tensor<T>& pred, const Tensor<T>& target) {
  return kind == LossKind::l1 ? l1_loss(pred, target) : mse_loss(pred, target);
}

}  // namespace rfr

#endif  // RFR_TENSOR_HPP
