#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lipread/tensor.hpp"

namespace lipread::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// A differentiable layer over batched tensors (leading dimension = batch).
///
/// `infer` is the pure inference path and may run concurrently on a shared
/// layer. `forward` is the training path: it caches whatever `backward`
/// needs, and `backward` accumulates parameter gradients into
/// `Parameter::grad` and returns the gradient w.r.t. the layer input.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  /// Per-sample output shape for a per-sample input shape.
  virtual Shape output_shape(const Shape& input) const = 0;
  virtual Tensor infer(const Tensor& x) const = 0;
  virtual Tensor forward(const Tensor& x) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;

  virtual std::vector<Parameter*> parameters() { return {}; }
  /// Resets any training-time randomness (dropout masks).
  virtual void reseed(std::uint64_t /*seed*/) {}
};

using LayerPtr = std::unique_ptr<Layer>;

/// 2-D convolution over NHWC input, "same" padding (k / 2), optional stride.
class Conv2D final : public Layer {
 public:
  Conv2D(int in_channels, int out_channels, int kernel, int stride, std::mt19937_64& rng);

  std::string kind() const override { return "conv2d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

 private:
  int cin_, cout_, k_, stride_, pad_;
  Parameter weight_;  // (k*k*cin, cout)
  Parameter bias_;    // (cout)
  Shape in_shape_;
  Tensor cols_;
};

/// Per-channel 3x3 (or k x k) convolution, "same" padding.
class DepthwiseConv2D final : public Layer {
 public:
  DepthwiseConv2D(int channels, int kernel, int stride, std::mt19937_64& rng);

  std::string kind() const override { return "depthwise_conv2d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

 private:
  int channels_, k_, stride_, pad_;
  Parameter weight_;  // (k*k, channels)
  Parameter bias_;
  Tensor input_;
};

class MaxPool2D final : public Layer {
 public:
  explicit MaxPool2D(int size = 2) : size_(size) {}

  std::string kind() const override { return "maxpool2d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor pool(const Tensor& x, std::vector<std::size_t>* argmax) const;
  int size_;
  Shape in_shape_;
  std::vector<std::size_t> argmax_;
};

/// Non-overlapping average pooling (window = stride = size).
class AvgPool2D final : public Layer {
 public:
  explicit AvgPool2D(int size) : size_(size) {}

  std::string kind() const override { return "avgpool2d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  int size_;
  Shape in_shape_;
};

class GlobalAvgPool final : public Layer {
 public:
  std::string kind() const override { return "global_avgpool"; }
  Shape output_shape(const Shape& input) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Shape in_shape_;
};

class Flatten final : public Layer {
 public:
  std::string kind() const override { return "flatten"; }
  Shape output_shape(const Shape& input) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Shape in_shape_;
};

class Dense final : public Layer {
 public:
  Dense(int in_features, int out_features, std::mt19937_64& rng, bool he_init = true);

  std::string kind() const override { return "dense"; }
  Shape output_shape(const Shape& input) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

 private:
  int in_, out_;
  Parameter weight_;  // (in, out)
  Parameter bias_;
  Tensor input_;
};

class ReLU final : public Layer {
 public:
  std::string kind() const override { return "relu"; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor output_;
};

/// Inverted dropout; identity at inference.
class Dropout final : public Layer {
 public:
  Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {}

  std::string kind() const override { return "dropout"; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor infer(const Tensor& x) const override { return x; }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  void reseed(std::uint64_t seed) override { rng_.seed(seed); }

 private:
  double rate_;
  std::mt19937_64 rng_;
  std::vector<Scalar> mask_;
};

class Sequential final : public Layer {
 public:
  Sequential() = default;

  Sequential& add(LayerPtr layer);
  template <typename L, typename... Args>
  Sequential& emplace(Args&&... args) {
    return add(std::make_unique<L>(std::forward<Args>(args)...));
  }

  std::size_t size() const noexcept { return layers_.size(); }
  Layer& at(std::size_t i) { return *layers_.at(i); }

  std::string kind() const override { return "sequential"; }
  Shape output_shape(const Shape& input) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override;
  void reseed(std::uint64_t seed) override;

 private:
  std::vector<LayerPtr> layers_;
};

/// relu(body(x) + shortcut(x)); the shortcut is identity when null.
class Residual final : public Layer {
 public:
  Residual(std::unique_ptr<Sequential> body, LayerPtr shortcut);

  std::string kind() const override { return "residual"; }
  Shape output_shape(const Shape& input) const override { return body_->output_shape(input); }
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override;
  void reseed(std::uint64_t seed) override;

 private:
  std::unique_ptr<Sequential> body_;
  LayerPtr shortcut_;
  Tensor output_;
};

/// Applies `inner` to every time step of (N, T, ...) input and flattens the
/// per-step output to (N, T, F).
class TimeDistributed final : public Layer {
 public:
  explicit TimeDistributed(std::unique_ptr<Sequential> inner) : inner_(std::move(inner)) {}

  std::string kind() const override { return "time_distributed"; }
  Shape output_shape(const Shape& input) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return inner_->parameters(); }
  void reseed(std::uint64_t seed) override { inner_->reseed(seed); }

 private:
  std::unique_ptr<Sequential> inner_;
  Shape in_shape_;
};

/// Single-layer LSTM over (N, T, F) returning the last hidden state (N, H).
/// Gate order in the fused weights: input, forget, cell, output.
class LSTM final : public Layer {
 public:
  LSTM(int input_size, int hidden_size, std::mt19937_64& rng);

  std::string kind() const override { return "lstm"; }
  Shape output_shape(const Shape& input) const override;
  Tensor infer(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&w_input_, &w_hidden_, &bias_}; }

 private:
  struct Trace;
  Tensor run(const Tensor& x, Trace* trace) const;

  int input_, hidden_;
  Parameter w_input_;   // (F, 4H)
  Parameter w_hidden_;  // (H, 4H)
  Parameter bias_;      // (4H)
  std::shared_ptr<Trace> trace_;
};

/// Row-wise softmax of (N, C) logits.
Tensor softmax(const Tensor& logits);

/// Mean categorical cross-entropy of (N, C) logits against integer labels.
/// Writes d(loss)/d(logits) into `grad` when non-null.
double softmax_cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor* grad);

}  // namespace lipread::nn
