#include <cmath>

#include "eigen_util.hpp"
#include "lipread/errors.hpp"
#include "lipread/layers.hpp"

namespace lipread::nn {
namespace {

struct Geometry {
  int n, h, w, c, ho, wo;
};

Geometry geometry(const Shape& s, int k, int stride, int pad) {
  if (s.size() != 4) throw ShapeMismatch("convolution expects NHWC input, got " + shape_string(s));
  Geometry g{s[0], s[1], s[2], s[3], 0, 0};
  g.ho = (g.h + 2 * pad - k) / stride + 1;
  g.wo = (g.w + 2 * pad - k) / stride + 1;
  if (g.ho < 1 || g.wo < 1) throw ShapeMismatch("input " + shape_string(s) + " too small for kernel");
  return g;
}

void im2col(const Scalar* x, const Geometry& g, int k, int stride, int pad, Scalar* cols) {
  const std::size_t row_len = static_cast<std::size_t>(k) * k * g.c;
  for (int n = 0; n < g.n; ++n)
    for (int oy = 0; oy < g.ho; ++oy)
      for (int ox = 0; ox < g.wo; ++ox) {
        Scalar* row = cols + ((static_cast<std::size_t>(n) * g.ho + oy) * g.wo + ox) * row_len;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * stride + ky - pad;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * stride + kx - pad;
            Scalar* dst = row + (static_cast<std::size_t>(ky) * k + kx) * g.c;
            if (iy < 0 || iy >= g.h || ix < 0 || ix >= g.w) {
              std::fill(dst, dst + g.c, Scalar{0});
            } else {
              const Scalar* src = x + ((static_cast<std::size_t>(n) * g.h + iy) * g.w + ix) * g.c;
              std::copy(src, src + g.c, dst);
            }
          }
        }
      }
}

void col2im(const Scalar* cols, const Geometry& g, int k, int stride, int pad, Scalar* dx) {
  const std::size_t row_len = static_cast<std::size_t>(k) * k * g.c;
  for (int n = 0; n < g.n; ++n)
    for (int oy = 0; oy < g.ho; ++oy)
      for (int ox = 0; ox < g.wo; ++ox) {
        const Scalar* row = cols + ((static_cast<std::size_t>(n) * g.ho + oy) * g.wo + ox) * row_len;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= g.h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * stride + kx - pad;
            if (ix < 0 || ix >= g.w) continue;
            const Scalar* src = row + (static_cast<std::size_t>(ky) * k + kx) * g.c;
            Scalar* dst = dx + ((static_cast<std::size_t>(n) * g.h + iy) * g.w + ix) * g.c;
            for (int c = 0; c < g.c; ++c) dst[c] += src[c];
          }
        }
      }
}

void he_normal(Tensor& t, int fan_in, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> dist(0.0, std::sqrt(2.0 / fan_in));
  for (auto& v : t.values()) v = dist(rng);
}

}  // namespace

// ---------------------------------------------------------------------------

Conv2D::Conv2D(int in_channels, int out_channels, int kernel, int stride, std::mt19937_64& rng)
    : cin_(in_channels), cout_(out_channels), k_(kernel), stride_(stride), pad_(kernel / 2) {
  if (cin_ < 1 || cout_ < 1 || k_ < 1 || stride_ < 1) throw InvalidSpec("bad convolution dimensions");
  weight_ = {"weight", Tensor({k_ * k_ * cin_, cout_}), Tensor({k_ * k_ * cin_, cout_})};
  bias_ = {"bias", Tensor({cout_}), Tensor({cout_})};
  he_normal(weight_.value, k_ * k_ * cin_, rng);
}

Shape Conv2D::output_shape(const Shape& input) const {
  Shape s = input;
  s.insert(s.begin(), 1);
  const auto g = geometry(s, k_, stride_, pad_);
  if (g.c != cin_) throw ShapeMismatch("conv2d expects " + std::to_string(cin_) + " channels");
  return {g.ho, g.wo, cout_};
}

Tensor Conv2D::infer(const Tensor& x) const {
  const auto g = geometry(x.shape(), k_, stride_, pad_);
  if (g.c != cin_) throw ShapeMismatch("conv2d expects " + std::to_string(cin_) + " channels");
  const Eigen::Index rows = static_cast<Eigen::Index>(g.n) * g.ho * g.wo;
  const Eigen::Index kkc = static_cast<Eigen::Index>(k_) * k_ * cin_;
  Tensor out({g.n, g.ho, g.wo, cout_});
  auto y = as_matrix(out, rows, cout_);
  const auto w = as_matrix(weight_.value, kkc, cout_);
  if (k_ == 1 && stride_ == 1) {
    y.noalias() = as_matrix(x, rows, kkc) * w;
  } else {
    Tensor cols({static_cast<int>(rows), static_cast<int>(kkc)});
    im2col(x.data(), g, k_, stride_, pad_, cols.data());
    y.noalias() = as_matrix(cols, rows, kkc) * w;
  }
  y.rowwise() += ConstVectorMap(bias_.value.data(), cout_);
  return out;
}

Tensor Conv2D::forward(const Tensor& x) {
  const auto g = geometry(x.shape(), k_, stride_, pad_);
  if (g.c != cin_) throw ShapeMismatch("conv2d expects " + std::to_string(cin_) + " channels");
  in_shape_ = x.shape();
  const Eigen::Index rows = static_cast<Eigen::Index>(g.n) * g.ho * g.wo;
  const Eigen::Index kkc = static_cast<Eigen::Index>(k_) * k_ * cin_;
  if (k_ == 1 && stride_ == 1) {
    cols_ = x.reshaped({static_cast<int>(rows), static_cast<int>(kkc)});
  } else {
    cols_ = Tensor({static_cast<int>(rows), static_cast<int>(kkc)});
    im2col(x.data(), g, k_, stride_, pad_, cols_.data());
  }
  Tensor out({g.n, g.ho, g.wo, cout_});
  auto y = as_matrix(out, rows, cout_);
  y.noalias() = as_matrix(cols_, rows, kkc) * as_matrix(weight_.value, kkc, cout_);
  y.rowwise() += ConstVectorMap(bias_.value.data(), cout_);
  return out;
}

Tensor Conv2D::backward(const Tensor& grad_out) {
  const auto g = geometry(in_shape_, k_, stride_, pad_);
  const Eigen::Index rows = static_cast<Eigen::Index>(g.n) * g.ho * g.wo;
  const Eigen::Index kkc = static_cast<Eigen::Index>(k_) * k_ * cin_;
  const auto dy = as_matrix(grad_out, rows, cout_);
  const auto cols = as_matrix(cols_, rows, kkc);
  as_matrix(weight_.grad, kkc, cout_).noalias() += cols.transpose() * dy;
  VectorMap(bias_.grad.data(), cout_) += dy.colwise().sum();

  Tensor dx(in_shape_);
  if (k_ == 1 && stride_ == 1) {
    as_matrix(dx, rows, kkc).noalias() = dy * as_matrix(weight_.value, kkc, cout_).transpose();
  } else {
    Tensor dcols({static_cast<int>(rows), static_cast<int>(kkc)});
    as_matrix(dcols, rows, kkc).noalias() = dy * as_matrix(weight_.value, kkc, cout_).transpose();
    col2im(dcols.data(), g, k_, stride_, pad_, dx.data());
  }
  return dx;
}

// ---------------------------------------------------------------------------

DepthwiseConv2D::DepthwiseConv2D(int channels, int kernel, int stride, std::mt19937_64& rng)
    : channels_(channels), k_(kernel), stride_(stride), pad_(kernel / 2) {
  if (channels_ < 1 || k_ < 1 || stride_ < 1) throw InvalidSpec("bad depthwise convolution dimensions");
  weight_ = {"weight", Tensor({k_ * k_, channels_}), Tensor({k_ * k_, channels_})};
  bias_ = {"bias", Tensor({channels_}), Tensor({channels_})};
  he_normal(weight_.value, k_ * k_, rng);
}

Shape DepthwiseConv2D::output_shape(const Shape& input) const {
  Shape s = input;
  s.insert(s.begin(), 1);
  const auto g = geometry(s, k_, stride_, pad_);
  if (g.c != channels_) throw ShapeMismatch("depthwise conv expects " + std::to_string(channels_) + " channels");
  return {g.ho, g.wo, channels_};
}

Tensor DepthwiseConv2D::infer(const Tensor& x) const {
  const auto g = geometry(x.shape(), k_, stride_, pad_);
  if (g.c != channels_) throw ShapeMismatch("depthwise conv expects " + std::to_string(channels_) + " channels");
  Tensor out({g.n, g.ho, g.wo, g.c});
  const Scalar* w = weight_.value.data();
  for (int n = 0; n < g.n; ++n)
    for (int oy = 0; oy < g.ho; ++oy)
      for (int ox = 0; ox < g.wo; ++ox) {
        Scalar* dst = out.data() + ((static_cast<std::size_t>(n) * g.ho + oy) * g.wo + ox) * g.c;
        std::copy(bias_.value.data(), bias_.value.data() + g.c, dst);
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ + ky - pad_;
          if (iy < 0 || iy >= g.h) continue;
          for (int kx = 0; kx < k_; ++kx) {
            const int ix = ox * stride_ + kx - pad_;
            if (ix < 0 || ix >= g.w) continue;
            const Scalar* src = x.data() + ((static_cast<std::size_t>(n) * g.h + iy) * g.w + ix) * g.c;
            const Scalar* wk = w + (static_cast<std::size_t>(ky) * k_ + kx) * g.c;
            for (int c = 0; c < g.c; ++c) dst[c] += src[c] * wk[c];
          }
        }
      }
  return out;
}

Tensor DepthwiseConv2D::forward(const Tensor& x) {
  input_ = x;
  return infer(x);
}

Tensor DepthwiseConv2D::backward(const Tensor& grad_out) {
  const auto g = geometry(input_.shape(), k_, stride_, pad_);
  Tensor dx(input_.shape());
  const Scalar* w = weight_.value.data();
  Scalar* dw = weight_.grad.data();
  Scalar* db = bias_.grad.data();
  for (int n = 0; n < g.n; ++n)
    for (int oy = 0; oy < g.ho; ++oy)
      for (int ox = 0; ox < g.wo; ++ox) {
        const Scalar* dy = grad_out.data() + ((static_cast<std::size_t>(n) * g.ho + oy) * g.wo + ox) * g.c;
        for (int c = 0; c < g.c; ++c) db[c] += dy[c];
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ + ky - pad_;
          if (iy < 0 || iy >= g.h) continue;
          for (int kx = 0; kx < k_; ++kx) {
            const int ix = ox * stride_ + kx - pad_;
            if (ix < 0 || ix >= g.w) continue;
            const std::size_t in_off = ((static_cast<std::size_t>(n) * g.h + iy) * g.w + ix) * g.c;
            const std::size_t w_off = (static_cast<std::size_t>(ky) * k_ + kx) * g.c;
            for (int c = 0; c < g.c; ++c) {
              dw[w_off + c] += dy[c] * input_[in_off + c];
              dx[in_off + c] += dy[c] * w[w_off + c];
            }
          }
        }
      }
  return dx;
}

}  // namespace lipread::nn
