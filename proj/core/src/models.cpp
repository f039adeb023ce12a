#include "lipread/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lipread/errors.hpp"
#include "lipread/temporal.hpp"

namespace lipread {
namespace {

using nn::Conv2D;
using nn::Dense;
using nn::DepthwiseConv2D;
using nn::Dropout;
using nn::Flatten;
using nn::GlobalAvgPool;
using nn::MaxPool2D;
using nn::ReLU;
using nn::Sequential;

constexpr int kFrames = static_cast<int>(kStandardFrames);

void conv_relu(Sequential& s, int cin, int cout, std::mt19937_64& rng, int stride = 1) {
  s.emplace<Conv2D>(cin, cout, 3, stride, rng);
  s.emplace<ReLU>();
}

int flat_size(const Sequential& s, const nn::Shape& input) {
  return static_cast<int>(nn::shape_size(s.output_shape(input)));
}

int frame_side(const ModelSpec& spec) { return kFrameSize / spec.hyperparams.stem_pool; }

std::unique_ptr<Sequential> direct_cnn(const ModelSpec& spec, std::mt19937_64& rng) {
  const auto& hp = spec.hyperparams;
  const int w = hp.width, side = frame_side(spec);
  auto net = std::make_unique<Sequential>();
  conv_relu(*net, 3, w, rng);
  net->emplace<MaxPool2D>(2);
  conv_relu(*net, w, 2 * w, rng);
  net->emplace<MaxPool2D>(2);
  conv_relu(*net, 2 * w, 4 * w, rng);
  net->emplace<MaxPool2D>(2);
  net->emplace<Flatten>();
  const int flat = flat_size(*net, {side, side, 3});
  net->emplace<Dropout>(hp.dropout, rng());
  net->emplace<Dense>(flat, spec.num_classes, rng, false);
  return net;
}

std::unique_ptr<Sequential> direct_lstm(const ModelSpec& spec, std::mt19937_64& rng) {
  const auto& hp = spec.hyperparams;
  const int w = hp.width, side = frame_side(spec);
  auto encoder = std::make_unique<Sequential>();
  conv_relu(*encoder, 3, w, rng);
  encoder->emplace<MaxPool2D>(2);
  conv_relu(*encoder, w, 2 * w, rng);
  encoder->emplace<MaxPool2D>(2);
  encoder->emplace<Flatten>();
  const int features = flat_size(*encoder, {side, side, 3});

  auto net = std::make_unique<Sequential>();
  net->emplace<nn::TimeDistributed>(std::move(encoder));
  net->emplace<nn::LSTM>(features, hp.lstm_hidden, rng);
  net->emplace<Dense>(hp.lstm_hidden, hp.dense_hidden, rng);
  net->emplace<ReLU>();
  net->emplace<Dropout>(hp.dropout, rng());
  net->emplace<Dense>(hp.dense_hidden, spec.num_classes, rng, false);
  return net;
}

// Indirect backbones see the (20, 20, 2) landmark tensor as a 20x20 image
// with (x, y) channels: rows are frames, columns are mouth points.

std::unique_ptr<Sequential> mobile(const ModelSpec& spec, std::mt19937_64& rng) {
  const auto& hp = spec.hyperparams;
  const int w = hp.width;
  auto net = std::make_unique<Sequential>();
  conv_relu(*net, 2, w, rng);
  net->emplace<DepthwiseConv2D>(w, 3, 2, rng);
  net->emplace<ReLU>();
  net->emplace<Conv2D>(w, 2 * w, 1, 1, rng);
  net->emplace<ReLU>();
  net->emplace<DepthwiseConv2D>(2 * w, 3, 2, rng);
  net->emplace<ReLU>();
  net->emplace<Conv2D>(2 * w, 4 * w, 1, 1, rng);
  net->emplace<ReLU>();
  net->emplace<GlobalAvgPool>();
  net->emplace<Dropout>(hp.dropout, rng());
  net->emplace<Dense>(4 * w, spec.num_classes, rng, false);
  return net;
}

std::unique_ptr<Sequential> vgg(const ModelSpec& spec, std::mt19937_64& rng) {
  const auto& hp = spec.hyperparams;
  const int w = hp.width;
  auto net = std::make_unique<Sequential>();
  conv_relu(*net, 2, w, rng);
  conv_relu(*net, w, w, rng);
  net->emplace<MaxPool2D>(2);
  conv_relu(*net, w, 2 * w, rng);
  conv_relu(*net, 2 * w, 2 * w, rng);
  net->emplace<MaxPool2D>(2);
  net->emplace<Flatten>();
  const int flat = flat_size(*net, {kFrames, kMouthPoints, 2});
  net->emplace<Dense>(flat, hp.dense_hidden, rng);
  net->emplace<ReLU>();
  net->emplace<Dropout>(hp.dropout, rng());
  net->emplace<Dense>(hp.dense_hidden, spec.num_classes, rng, false);
  return net;
}

std::unique_ptr<Sequential> resnet(const ModelSpec& spec, std::mt19937_64& rng) {
  const auto& hp = spec.hyperparams;
  const int w = hp.width;
  auto net = std::make_unique<Sequential>();
  conv_relu(*net, 2, w, rng);

  auto body1 = std::make_unique<Sequential>();
  conv_relu(*body1, w, w, rng);
  body1->emplace<Conv2D>(w, w, 3, 1, rng);
  net->emplace<nn::Residual>(std::move(body1), nullptr);

  auto body2 = std::make_unique<Sequential>();
  conv_relu(*body2, w, 2 * w, rng, 2);
  body2->emplace<Conv2D>(2 * w, 2 * w, 3, 1, rng);
  net->emplace<nn::Residual>(std::move(body2), std::make_unique<Conv2D>(w, 2 * w, 1, 2, rng));

  net->emplace<GlobalAvgPool>();
  net->emplace<Dropout>(hp.dropout, rng());
  net->emplace<Dense>(2 * w, spec.num_classes, rng, false);
  return net;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::indirect_cnn: return "indirect_cnn";
    case Method::direct_cnn: return "direct_cnn";
    case Method::direct_lstm: return "direct_lstm";
  }
  return "?";
}

std::string to_string(Backbone backbone) {
  switch (backbone) {
    case Backbone::none: return "none";
    case Backbone::mobile: return "mobile";
    case Backbone::vgg: return "vgg";
    case Backbone::resnet: return "resnet";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "indirect" || name == "indirect_cnn") return Method::indirect_cnn;
  if (name == "cnn" || name == "direct_cnn") return Method::direct_cnn;
  if (name == "lstm" || name == "direct_lstm") return Method::direct_lstm;
  throw InvalidSpec("unknown method '" + name + "'");
}

Backbone parse_backbone(const std::string& name) {
  if (name == "none" || name.empty()) return Backbone::none;
  if (name == "mobile" || name == "mobilenet") return Backbone::mobile;
  if (name == "vgg" || name == "vgg19") return Backbone::vgg;
  if (name == "resnet") return Backbone::resnet;
  throw InvalidSpec("unknown backbone '" + name + "'");
}

std::vector<int> expected_input_shape(Method method) {
  if (method == Method::indirect_cnn) return {kFrames, kMouthPoints, 2};
  return {kFrames, kFrameSize, kFrameSize, 3};
}

ModelSpec ModelSpec::defaults(Method method, int num_classes, Backbone backbone) {
  ModelSpec spec;
  spec.method = method;
  spec.num_classes = num_classes;
  spec.input_shape = expected_input_shape(method);
  if (method == Method::indirect_cnn) {
    spec.backbone = backbone == Backbone::none ? Backbone::mobile : backbone;
    spec.hyperparams.width = 16;
  } else if (method == Method::direct_lstm) {
    spec.hyperparams.width = 8;
    spec.hyperparams.motion_gain = 10.0;
  }
  return spec;
}

void ModelSpec::validate() const {
  if (num_classes < 2) throw InvalidSpec("num_classes must be at least 2");
  if (input_shape != expected_input_shape(method))
    throw InvalidSpec("input shape " + nn::shape_string(input_shape) + " does not match method " +
                      to_string(method));
  if (method == Method::indirect_cnn && backbone == Backbone::none)
    throw InvalidSpec("indirect_cnn needs a backbone (mobile, vgg, resnet)");
  if (method != Method::indirect_cnn && backbone != Backbone::none)
    throw InvalidSpec("backbones apply to indirect_cnn only");
  const auto& hp = hyperparams;
  if (!(hp.dropout >= 0.0 && hp.dropout < 1.0)) throw InvalidSpec("dropout must be in [0, 1)");
  if (hp.width < 1 || hp.lstm_hidden < 1 || hp.dense_hidden < 1) throw InvalidSpec("layer sizes must be positive");
  if (!(hp.learning_rate >= 0.0)) throw InvalidSpec("learning rate must be non-negative");
  if (!(hp.motion_gain >= 0.0) || !std::isfinite(hp.motion_gain)) throw InvalidSpec("motion_gain must be finite and >= 0");
  if (method == Method::indirect_cnn && hp.motion_gain > 0) throw InvalidSpec("motion_gain applies to direct methods only");
  if (method != Method::indirect_cnn) {
    if (hp.stem_pool < 1 || kFrameSize % hp.stem_pool != 0)
      throw InvalidSpec("stem_pool must divide " + std::to_string(kFrameSize));
    const int side = kFrameSize / hp.stem_pool;
    if (side < (method == Method::direct_cnn ? 8 : 4))
      throw InvalidSpec("stem_pool " + std::to_string(hp.stem_pool) + " leaves frames too small");
  }
}

std::unique_ptr<nn::Sequential> build_network(const ModelSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  switch (spec.method) {
    case Method::direct_cnn: return direct_cnn(spec, rng);
    case Method::direct_lstm: return direct_lstm(spec, rng);
    case Method::indirect_cnn:
      switch (spec.backbone) {
        case Backbone::mobile: return mobile(spec, rng);
        case Backbone::vgg: return vgg(spec, rng);
        case Backbone::resnet: return resnet(spec, rng);
        case Backbone::none: break;
      }
  }
  throw InvalidSpec("unsupported spec");
}

Prediction make_prediction(std::span<const double> distribution, const WordVocabulary& vocab) {
  if (distribution.size() != vocab.size())
    throw ShapeMismatch("distribution has " + std::to_string(distribution.size()) + " classes, vocabulary " +
                        std::to_string(vocab.size()));
  Prediction p;
  p.distribution.assign(distribution.begin(), distribution.end());
  p.class_id = static_cast<int>(std::max_element(distribution.begin(), distribution.end()) - distribution.begin());
  p.confidence = distribution[static_cast<std::size_t>(p.class_id)];
  p.label = vocab.word(p.class_id);
  return p;
}

std::vector<double> aggregate_frame_distributions(const nn::Tensor& per_frame) {
  if (per_frame.rank() != 2 || per_frame.dim(0) < 1) throw ShapeMismatch("expected (T, C) distributions");
  const int t = per_frame.dim(0), c = per_frame.dim(1);
  std::vector<double> mean(static_cast<std::size_t>(c), 0.0);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < c; ++j) mean[static_cast<std::size_t>(j)] += per_frame[static_cast<std::size_t>(i) * c + j];
  for (auto& v : mean) v /= t;
  return mean;
}

void subtract_clip_mean(nn::Tensor& clip, double gain) {
  const int frames = clip.dim(0);
  const std::size_t per = clip.size() / static_cast<std::size_t>(frames);
  std::vector<double> mean(per, 0.0);
  for (int t = 0; t < frames; ++t) {
    const double* f = clip.data() + static_cast<std::size_t>(t) * per;
    for (std::size_t i = 0; i < per; ++i) mean[i] += f[i];
  }
  for (auto& m : mean) m /= frames;
  for (int t = 0; t < frames; ++t) {
    double* f = clip.data() + static_cast<std::size_t>(t) * per;
    for (std::size_t i = 0; i < per; ++i) f[i] = gain * (f[i] - mean[i]);
  }
}

nn::Tensor pool_frames(const FrameSequence& seq, int factor) {
  if (factor < 1 || seq.height % factor != 0 || seq.width % factor != 0)
    throw ShapeMismatch("pool factor does not divide the frame size");
  const int ho = seq.height / factor, wo = seq.width / factor;
  nn::Tensor out({seq.frames, ho, wo, 3});
  const double norm = 1.0 / (factor * factor);
  for (int t = 0; t < seq.frames; ++t) {
    const float* src = seq.frame(t);
    double* dst = out.data() + static_cast<std::size_t>(t) * ho * wo * 3;
    for (int y = 0; y < seq.height; ++y) {
      double* row = dst + static_cast<std::size_t>(y / factor) * wo * 3;
      const float* in = src + static_cast<std::size_t>(y) * seq.width * 3;
      for (int x = 0; x < seq.width; ++x) {
        double* cell = row + static_cast<std::size_t>(x / factor) * 3;
        cell[0] += in[3 * x];
        cell[1] += in[3 * x + 1];
        cell[2] += in[3 * x + 2];
      }
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(ho) * wo * 3; ++i) dst[i] *= norm;
  }
  return out;
}

TrainedModel::TrainedModel(ModelSpec spec, WordVocabulary vocab)
    : spec_(std::move(spec)), vocab_(std::move(vocab)) {
  if (static_cast<int>(vocab_.size()) != spec_.num_classes)
    throw InvalidSpec("vocabulary size " + std::to_string(vocab_.size()) + " != num_classes " +
                      std::to_string(spec_.num_classes));
  network_ = build_network(spec_);
  fingerprint_.seed = spec_.seed;
}

TrainedModel::TrainedModel(ModelSpec spec, WordVocabulary vocab, std::unique_ptr<nn::Sequential> network)
    : spec_(std::move(spec)), vocab_(std::move(vocab)), network_(std::move(network)) {
  if (!network_) throw InvalidSpec("null network");
  fingerprint_.seed = spec_.seed;
}

std::vector<nn::Parameter*> TrainedModel::parameters() const { return network_->parameters(); }

std::size_t TrainedModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

std::vector<nn::Tensor> TrainedModel::weights() const {
  std::vector<nn::Tensor> out;
  for (const auto* p : parameters()) out.push_back(p->value);
  return out;
}

void TrainedModel::set_weights(const std::vector<nn::Tensor>& weights) {
  const auto params = parameters();
  if (weights.size() != params.size()) throw ShapeMismatch("weight count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (weights[i].shape() != params[i]->value.shape())
      throw ShapeMismatch("weight " + params[i]->name + " has shape " + nn::shape_string(weights[i].shape()));
    params[i]->value = weights[i];
  }
}

nn::Tensor TrainedModel::encode(const Features& features) const {
  if (spec_.method == Method::indirect_cnn) {
    const auto* lips = std::get_if<LipTensor>(&features);
    if (!lips) throw ShapeMismatch("indirect model expects landmark features");
    if (lips->frames != kFrames || lips->data.size() != static_cast<std::size_t>(kFrames) * kMouthPoints * 2)
      throw ShapeMismatch("landmark tensor must be (20, 20, 2)");
    return nn::Tensor({kFrames, kMouthPoints, 2}, lips->data);
  }
  const auto* seq = std::get_if<FrameSequence>(&features);
  if (!seq) throw ShapeMismatch("direct model expects frame features");
  if (seq->frames != kFrames || seq->height != kFrameSize || seq->width != kFrameSize)
    throw ShapeMismatch("frame sequence must be (20, 300, 300, 3), got (" + std::to_string(seq->frames) + ", " +
                        std::to_string(seq->height) + ", " + std::to_string(seq->width) + ", 3)");
  nn::Tensor x = pool_frames(*seq, spec_.hyperparams.stem_pool);
  if (spec_.hyperparams.motion_gain > 0) subtract_clip_mean(x, spec_.hyperparams.motion_gain);
  return x;
}

nn::Shape TrainedModel::sample_shape() const {
  if (spec_.method == Method::indirect_cnn) return {kFrames, kMouthPoints, 2};
  const int side = frame_side(spec_);
  if (spec_.method == Method::direct_cnn) return {side, side, 3};
  return {kFrames, side, side, 3};
}

nn::Tensor TrainedModel::predict_encoded(const nn::Tensor& clips) const {
  if (spec_.method != Method::direct_cnn) return nn::softmax(network_->infer(clips));
  const int n = clips.dim(0), t = clips.dim(1);
  nn::Shape frames(clips.shape().begin() + 1, clips.shape().end());
  frames[0] = n * t;
  const nn::Tensor per_frame = nn::softmax(network_->infer(clips.reshaped(frames)));
  const int c = per_frame.dim(1);
  nn::Tensor out({n, c});
  for (int b = 0; b < n; ++b) {
    const auto mean = aggregate_frame_distributions(per_frame.slice(b * t, (b + 1) * t));
    std::copy(mean.begin(), mean.end(), out.data() + static_cast<std::size_t>(b) * c);
  }
  return out;
}

Prediction predict_clip(const TrainedModel& model, const Features& features) {
  nn::Tensor x = model.encode(features);
  nn::Shape batched{1};
  batched.insert(batched.end(), x.shape().begin(), x.shape().end());
  const nn::Tensor dist = model.predict_encoded(std::move(x).reshaped(batched));
  return make_prediction(dist.values(), model.vocab());
}

}  // namespace lipread
