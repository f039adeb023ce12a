#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lipread/frames.hpp"
#include "lipread/landmarks.hpp"
#include "lipread/layers.hpp"
#include "lipread/vocabulary.hpp"

namespace lipread {

enum class Method { indirect_cnn, direct_cnn, direct_lstm };
enum class Backbone { none, mobile, vgg, resnet };

std::string to_string(Method method);
std::string to_string(Backbone backbone);
/// Accepts the canonical names plus the CLI short forms indirect/cnn/lstm.
Method parse_method(const std::string& name);
Backbone parse_backbone(const std::string& name);

struct Hyperparams {
  double dropout = 0.5;
  int width = 16;          // base channel count
  int lstm_hidden = 128;
  int dense_hidden = 64;
  int stem_pool = 15;      // direct methods: 300x300 frames are average-pooled by this factor
  double motion_gain = 0;  // > 0: subtract the clip's mean frame and scale by this (direct_lstm default 10)
  double learning_rate = 1e-3;
  bool operator==(const Hyperparams&) const = default;
};

struct ModelSpec {
  Method method = Method::direct_lstm;
  Backbone backbone = Backbone::none;
  int num_classes = 7;
  std::vector<int> input_shape;  // (20,20,2) or (20,300,300,3)
  Hyperparams hyperparams;
  std::uint64_t seed = 0;        // initialization seed

  /// Paper-sized defaults for a method; indirect defaults to the mobile backbone.
  static ModelSpec defaults(Method method, int num_classes, Backbone backbone = Backbone::none);
  /// Throws InvalidSpec.
  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

std::vector<int> expected_input_shape(Method method);

/// Builds the network for `spec` from its seed. Throws InvalidSpec.
std::unique_ptr<nn::Sequential> build_network(const ModelSpec& spec);

struct Fingerprint {
  std::uint64_t seed = 0;
  std::string data_hash;
  bool operator==(const Fingerprint&) const = default;
};

struct Prediction {
  std::string label;
  int class_id = 0;
  double confidence = 0.0;
  std::vector<double> distribution;
};

/// argmax / max of a distribution; ties go to the lowest class id.
Prediction make_prediction(std::span<const double> distribution, const WordVocabulary& vocab);

/// Mean of per-frame softmax rows, (T, C) -> C.
std::vector<double> aggregate_frame_distributions(const nn::Tensor& per_frame);

using Features = std::variant<FrameSequence, LipTensor>;

/// Classifier plus everything needed to use it. Prediction is const and safe
/// to call from several threads; training goes through `network()`.
class TrainedModel {
 public:
  TrainedModel(ModelSpec spec, WordVocabulary vocab);
  /// Custom network (stubs, experiments). Cannot be rebuilt from the spec.
  TrainedModel(ModelSpec spec, WordVocabulary vocab, std::unique_ptr<nn::Sequential> network);

  const ModelSpec& spec() const noexcept { return spec_; }
  const WordVocabulary& vocab() const noexcept { return vocab_; }
  const Fingerprint& fingerprint() const noexcept { return fingerprint_; }
  void set_fingerprint(Fingerprint fp) { fingerprint_ = std::move(fp); }
  /// Free-form string metadata carried into checkpoints.
  std::map<std::string, std::string>& metadata() noexcept { return metadata_; }
  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }

  nn::Sequential& network() noexcept { return *network_; }
  const nn::Sequential& network() const noexcept { return *network_; }
  std::vector<nn::Parameter*> parameters() const;
  std::size_t parameter_count() const;
  std::vector<nn::Tensor> weights() const;
  void set_weights(const std::vector<nn::Tensor>& weights);

  /// Per-clip network input after the fixed stem:
  /// direct (20, 300/p, 300/p, 3), indirect (20, 20, 2). Throws ShapeMismatch.
  nn::Tensor encode(const Features& features) const;
  /// Shape of one training sample: a frame for direct_cnn, a clip otherwise.
  nn::Shape sample_shape() const;
  /// Class distributions for a batch of encoded clips, (N, C).
  nn::Tensor predict_encoded(const nn::Tensor& clips) const;

 private:
  ModelSpec spec_;
  WordVocabulary vocab_;
  Fingerprint fingerprint_;
  std::map<std::string, std::string> metadata_;
  std::unique_ptr<nn::Sequential> network_;
};

/// Deterministic clip prediction. direct_cnn averages the per-frame softmax
/// over the clip. Throws ShapeMismatch when the features do not match the
/// model input.
Prediction predict_clip(const TrainedModel& model, const Features& features);

/// Average pooling of a (T, 300, 300, 3) clip by `factor`, as a tensor.
nn::Tensor pool_frames(const FrameSequence& seq, int factor);
/// In place: every frame minus the clip's mean frame, times `gain`.
void subtract_clip_mean(nn::Tensor& clip, double gain);

}  // namespace lipread
