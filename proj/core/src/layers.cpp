#include <algorithm>
#include <cmath>
#include <limits>

#include "eigen_util.hpp"
#include "lipread/errors.hpp"
#include "lipread/layers.hpp"

namespace lipread::nn {
namespace {

void require_rank(const Shape& s, std::size_t rank, const char* who) {
  if (s.size() != rank)
    throw ShapeMismatch(std::string(who) + " expects rank " + std::to_string(rank) + " input, got " +
                        shape_string(s));
}

}  // namespace

// ---------------------------------------------------------------------------
// Pooling

Shape MaxPool2D::output_shape(const Shape& input) const {
  require_rank(input, 3, "maxpool2d");
  if (input[0] < size_ || input[1] < size_) throw ShapeMismatch("maxpool2d input smaller than window");
  return {input[0] / size_, input[1] / size_, input[2]};
}

Tensor MaxPool2D::pool(const Tensor& x, std::vector<std::size_t>* argmax) const {
  require_rank(x.shape(), 4, "maxpool2d");
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const int ho = h / size_, wo = w / size_;
  if (ho < 1 || wo < 1) throw ShapeMismatch("maxpool2d input smaller than window");
  Tensor out({n, ho, wo, c});
  if (argmax) argmax->assign(out.size(), 0);
  std::size_t o = 0;
  for (int b = 0; b < n; ++b)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox)
        for (int ch = 0; ch < c; ++ch, ++o) {
          Scalar best = -std::numeric_limits<Scalar>::infinity();
          std::size_t best_i = 0;
          for (int dy = 0; dy < size_; ++dy)
            for (int dx = 0; dx < size_; ++dx) {
              const std::size_t i =
                  ((static_cast<std::size_t>(b) * h + oy * size_ + dy) * w + ox * size_ + dx) * c + ch;
              if (x[i] > best) best = x[i], best_i = i;
            }
          out[o] = best;
          if (argmax) (*argmax)[o] = best_i;
        }
  return out;
}

Tensor MaxPool2D::infer(const Tensor& x) const { return pool(x, nullptr); }

Tensor MaxPool2D::forward(const Tensor& x) {
  in_shape_ = x.shape();
  return pool(x, &argmax_);
}

Tensor MaxPool2D::backward(const Tensor& grad_out) {
  Tensor dx(in_shape_);
  for (std::size_t o = 0; o < grad_out.size(); ++o) dx[argmax_[o]] += grad_out[o];
  return dx;
}

Shape AvgPool2D::output_shape(const Shape& input) const {
  require_rank(input, 3, "avgpool2d");
  if (input[0] < size_ || input[1] < size_) throw ShapeMismatch("avgpool2d input smaller than window");
  return {input[0] / size_, input[1] / size_, input[2]};
}

Tensor AvgPool2D::infer(const Tensor& x) const {
  require_rank(x.shape(), 4, "avgpool2d");
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const int ho = h / size_, wo = w / size_;
  if (ho < 1 || wo < 1) throw ShapeMismatch("avgpool2d input smaller than window");
  Tensor out({n, ho, wo, c});
  const Scalar norm = 1.0 / (size_ * size_);
  for (int b = 0; b < n; ++b)
    for (int y = 0; y < ho * size_; ++y) {
      const Scalar* src = x.data() + (static_cast<std::size_t>(b) * h + y) * w * c;
      Scalar* dst = out.data() + (static_cast<std::size_t>(b) * ho + y / size_) * wo * c;
      for (int xx = 0; xx < wo * size_; ++xx) {
        Scalar* d = dst + static_cast<std::size_t>(xx / size_) * c;
        const Scalar* s = src + static_cast<std::size_t>(xx) * c;
        for (int ch = 0; ch < c; ++ch) d[ch] += s[ch] * norm;
      }
    }
  return out;
}

Tensor AvgPool2D::forward(const Tensor& x) {
  in_shape_ = x.shape();
  return infer(x);
}

Tensor AvgPool2D::backward(const Tensor& grad_out) {
  Tensor dx(in_shape_);
  const int n = in_shape_[0], h = in_shape_[1], w = in_shape_[2], c = in_shape_[3];
  const int ho = h / size_, wo = w / size_;
  const Scalar norm = 1.0 / (size_ * size_);
  for (int b = 0; b < n; ++b)
    for (int y = 0; y < ho * size_; ++y)
      for (int xx = 0; xx < wo * size_; ++xx)
        for (int ch = 0; ch < c; ++ch)
          dx[((static_cast<std::size_t>(b) * h + y) * w + xx) * c + ch] =
              grad_out[((static_cast<std::size_t>(b) * ho + y / size_) * wo + xx / size_) * c + ch] * norm;
  return dx;
}

Shape GlobalAvgPool::output_shape(const Shape& input) const {
  require_rank(input, 3, "global_avgpool");
  return {input[2]};
}

Tensor GlobalAvgPool::infer(const Tensor& x) const {
  require_rank(x.shape(), 4, "global_avgpool");
  const int n = x.dim(0), hw = x.dim(1) * x.dim(2), c = x.dim(3);
  Tensor out({n, c});
  for (int b = 0; b < n; ++b) {
    const Scalar* src = x.data() + static_cast<std::size_t>(b) * hw * c;
    Scalar* dst = out.data() + static_cast<std::size_t>(b) * c;
    for (int i = 0; i < hw; ++i)
      for (int ch = 0; ch < c; ++ch) dst[ch] += src[static_cast<std::size_t>(i) * c + ch];
    for (int ch = 0; ch < c; ++ch) dst[ch] /= hw;
  }
  return out;
}

Tensor GlobalAvgPool::forward(const Tensor& x) {
  in_shape_ = x.shape();
  return infer(x);
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) {
  Tensor dx(in_shape_);
  const int n = in_shape_[0], hw = in_shape_[1] * in_shape_[2], c = in_shape_[3];
  for (int b = 0; b < n; ++b)
    for (int i = 0; i < hw; ++i)
      for (int ch = 0; ch < c; ++ch)
        dx[(static_cast<std::size_t>(b) * hw + i) * c + ch] = grad_out[static_cast<std::size_t>(b) * c + ch] / hw;
  return dx;
}

// ---------------------------------------------------------------------------
// Shape and dense layers

Shape Flatten::output_shape(const Shape& input) const { return {static_cast<int>(shape_size(input))}; }

Tensor Flatten::infer(const Tensor& x) const {
  const int n = x.dim(0);
  return x.reshaped({n, static_cast<int>(x.size() / static_cast<std::size_t>(std::max(n, 1)))});
}

Tensor Flatten::forward(const Tensor& x) {
  in_shape_ = x.shape();
  return infer(x);
}

Tensor Flatten::backward(const Tensor& grad_out) { return grad_out.reshaped(in_shape_); }

Dense::Dense(int in_features, int out_features, std::mt19937_64& rng, bool he_init)
    : in_(in_features), out_(out_features) {
  if (in_ < 1 || out_ < 1) throw InvalidSpec("bad dense dimensions");
  weight_ = {"weight", Tensor({in_, out_}), Tensor({in_, out_})};
  bias_ = {"bias", Tensor({out_}), Tensor({out_})};
  // He for ReLU hidden layers, Glorot-uniform for the output layer.
  if (he_init) {
    std::normal_distribution<Scalar> dist(0.0, std::sqrt(2.0 / in_));
    for (auto& v : weight_.value.values()) v = dist(rng);
  } else {
    const Scalar limit = std::sqrt(6.0 / (in_ + out_));
    std::uniform_real_distribution<Scalar> dist(-limit, limit);
    for (auto& v : weight_.value.values()) v = dist(rng);
  }
}

Shape Dense::output_shape(const Shape& input) const {
  if (input.size() != 1 || input[0] != in_)
    throw ShapeMismatch("dense expects (" + std::to_string(in_) + "), got " + shape_string(input));
  return {out_};
}

Tensor Dense::infer(const Tensor& x) const {
  if (x.rank() != 2 || x.dim(1) != in_)
    throw ShapeMismatch("dense expects (N," + std::to_string(in_) + "), got " + shape_string(x.shape()));
  const int n = x.dim(0);
  Tensor out({n, out_});
  auto y = as_matrix(out, n, out_);
  y.noalias() = as_matrix(x, n, in_) * as_matrix(weight_.value, in_, out_);
  y.rowwise() += ConstVectorMap(bias_.value.data(), out_);
  return out;
}

Tensor Dense::forward(const Tensor& x) {
  input_ = x;
  return infer(x);
}

Tensor Dense::backward(const Tensor& grad_out) {
  const int n = input_.dim(0);
  const auto dy = as_matrix(grad_out, n, out_);
  as_matrix(weight_.grad, in_, out_).noalias() += as_matrix(input_, n, in_).transpose() * dy;
  VectorMap(bias_.grad.data(), out_) += dy.colwise().sum();
  Tensor dx({n, in_});
  as_matrix(dx, n, in_).noalias() = dy * as_matrix(weight_.value, in_, out_).transpose();
  return dx;
}

Tensor ReLU::infer(const Tensor& x) const {
  Tensor out = x;
  for (auto& v : out.values()) v = v > 0 ? v : Scalar{0};
  return out;
}

Tensor ReLU::forward(const Tensor& x) {
  output_ = infer(x);
  return output_;
}

Tensor ReLU::backward(const Tensor& grad_out) {
  Tensor dx = grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (output_[i] <= 0) dx[i] = 0;
  return dx;
}

Tensor Dropout::forward(const Tensor& x) {
  mask_.assign(x.size(), 1.0);
  if (rate_ <= 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate_);
  const Scalar scale = 1.0 / (1.0 - rate_);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    mask_[i] = keep(rng_) ? scale : 0.0;
    out[i] *= mask_[i];
  }
  return out;
}

Tensor Dropout::backward(const Tensor& grad_out) {
  Tensor dx = grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask_[i];
  return dx;
}

// ---------------------------------------------------------------------------
// Containers

Sequential& Sequential::add(LayerPtr layer) {
  layers_.push_back(std::move(layer));
  return *this;
}

Shape Sequential::output_shape(const Shape& input) const {
  Shape s = input;
  for (const auto& l : layers_) s = l->output_shape(s);
  return s;
}

Tensor Sequential::infer(const Tensor& x) const {
  Tensor h = x;
  for (const auto& l : layers_) h = l->infer(h);
  return h;
}

Tensor Sequential::forward(const Tensor& x) {
  Tensor h = x;
  for (auto& l : layers_) h = l->forward(h);
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<Parameter*> Sequential::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) {
    auto p = l->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

void Sequential::reseed(std::uint64_t seed) {
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->reseed(seed * 1000003ULL + i);
}

Residual::Residual(std::unique_ptr<Sequential> body, LayerPtr shortcut)
    : body_(std::move(body)), shortcut_(std::move(shortcut)) {}

Tensor Residual::infer(const Tensor& x) const {
  Tensor y = body_->infer(x);
  const Tensor s = shortcut_ ? shortcut_->infer(x) : x;
  if (s.shape() != y.shape()) throw ShapeMismatch("residual branch shapes differ");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(Scalar{0}, y[i] + s[i]);
  return y;
}

Tensor Residual::forward(const Tensor& x) {
  Tensor y = body_->forward(x);
  const Tensor s = shortcut_ ? shortcut_->forward(x) : x;
  if (s.shape() != y.shape()) throw ShapeMismatch("residual branch shapes differ");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(Scalar{0}, y[i] + s[i]);
  output_ = y;
  return y;
}

Tensor Residual::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (output_[i] <= 0) g[i] = 0;
  Tensor dx = body_->backward(g);
  const Tensor ds = shortcut_ ? shortcut_->backward(g) : g;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += ds[i];
  return dx;
}

std::vector<Parameter*> Residual::parameters() {
  auto out = body_->parameters();
  if (shortcut_) {
    auto p = shortcut_->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

void Residual::reseed(std::uint64_t seed) {
  body_->reseed(seed);
  if (shortcut_) shortcut_->reseed(seed + 1);
}

Shape TimeDistributed::output_shape(const Shape& input) const {
  if (input.size() < 2) throw ShapeMismatch("time_distributed expects (T, ...) input");
  const Shape step(input.begin() + 1, input.end());
  return {input[0], static_cast<int>(shape_size(inner_->output_shape(step)))};
}

Tensor TimeDistributed::infer(const Tensor& x) const {
  if (x.rank() < 3) throw ShapeMismatch("time_distributed expects (N, T, ...) input");
  const int n = x.dim(0), t = x.dim(1);
  Shape merged(x.shape().begin() + 1, x.shape().end());
  merged[0] = n * t;
  Tensor y = inner_->infer(x.reshaped(merged));
  const int features = static_cast<int>(y.size() / static_cast<std::size_t>(n * t));
  return std::move(y).reshaped({n, t, features});
}

Tensor TimeDistributed::forward(const Tensor& x) {
  if (x.rank() < 3) throw ShapeMismatch("time_distributed expects (N, T, ...) input");
  in_shape_ = x.shape();
  const int n = x.dim(0), t = x.dim(1);
  Shape merged(x.shape().begin() + 1, x.shape().end());
  merged[0] = n * t;
  Tensor y = inner_->forward(x.reshaped(merged));
  const int features = static_cast<int>(y.size() / static_cast<std::size_t>(n * t));
  return std::move(y).reshaped({n, t, features});
}

Tensor TimeDistributed::backward(const Tensor& grad_out) {
  const int n = in_shape_[0], t = in_shape_[1];
  const int features = grad_out.dim(2);
  Tensor g = inner_->backward(grad_out.reshaped({n * t, features}));
  return std::move(g).reshaped(in_shape_);
}

// ---------------------------------------------------------------------------
// Loss

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 2) throw ShapeMismatch("softmax expects (N, C) logits");
  const int n = logits.dim(0), c = logits.dim(1);
  Tensor p = logits;
  for (int i = 0; i < n; ++i) {
    Scalar* row = p.data() + static_cast<std::size_t>(i) * c;
    const Scalar mx = *std::max_element(row, row + c);
    Scalar sum = 0;
    for (int j = 0; j < c; ++j) sum += (row[j] = std::exp(row[j] - mx));
    for (int j = 0; j < c; ++j) row[j] /= sum;
  }
  return p;
}

double softmax_cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor* grad) {
  const Tensor p = softmax(logits);
  const int n = logits.dim(0), c = logits.dim(1);
  if (static_cast<int>(labels.size()) != n) throw ShapeMismatch("label count differs from batch size");
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= c) throw InvalidArgument("label " + std::to_string(y) + " out of range");
    loss -= std::log(std::max(p[static_cast<std::size_t>(i) * c + y], 1e-300));
  }
  if (grad) {
    *grad = p;
    for (int i = 0; i < n; ++i) (*grad)[static_cast<std::size_t>(i) * c + labels[static_cast<std::size_t>(i)]] -= 1.0;
    for (auto& v : grad->values()) v /= n;
  }
  return loss / n;
}

}  // namespace lipread::nn
