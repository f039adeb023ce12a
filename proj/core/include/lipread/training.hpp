#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lipread/errors.hpp"
#include "lipread/manifest.hpp"
#include "lipread/models.hpp"
#include "lipread/optim.hpp"
#include "lipread/pipeline.hpp"

namespace lipread {

enum class SplitMode { two_way, three_way };
enum class SplitGroup { clip, participant };

std::string to_string(SplitMode mode);
SplitMode parse_split_mode(const std::string& name);  // two|two_way|three|three_way
std::string to_string(SplitGroup group);
SplitGroup parse_split_group(const std::string& name);

struct SplitConfig {
  SplitMode mode = SplitMode::two_way;
  std::vector<double> fractions{0.8, 0.2};  // train/test or train/val/test
  std::uint64_t seed = 0;
  bool stratified = true;
  SplitGroup group_by = SplitGroup::clip;

  static SplitConfig two_way(std::uint64_t seed);
  static SplitConfig three_way(std::uint64_t seed);
  /// Throws InvalidArgument.
  void validate() const;
};

/// Assigns every record to exactly one split. Per class (or over the whole
/// set when not stratified) counts follow the fractions by largest-remainder
/// rounding, so each split is within one sample of its exact share. With
/// participant grouping whole speakers are assigned instead of clips.
/// Throws TooFewSamples when a class (or the participant pool) has fewer
/// members than there are splits.
ClipManifest split_manifest(const ClipManifest& manifest, const SplitConfig& cfg);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 16;
  double learning_rate = 1e-3;
  nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
  int early_stopping_patience = 5;
  bool early_stopping = true;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument.
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0, train_acc = 0;
  double val_loss = 0, val_acc = 0;
  double wall_time = 0;  // seconds since training started
  bool operator==(const EpochRecord&) const = default;
};

enum class StopReason { early_stop, max_epochs, diverged };
std::string to_string(StopReason reason);
StopReason parse_stop_reason(const std::string& name);

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  StopReason stop_reason = StopReason::max_epochs;
  int best_epoch = 0;
  std::string monitor_split = "val";  // split the val_* columns were computed on
  std::string method;
};

/// DivergedTraining carrying the epochs completed before the failure.
class TrainingDiverged : public DivergedTraining {
 public:
  TrainingDiverged(const std::string& what, TrainingLog partial)
      : DivergedTraining(what), log_(std::move(partial)) {}
  const TrainingLog& log() const noexcept { return log_; }

 private:
  TrainingLog log_;
};

struct TrainHooks {
  /// Called after the epoch metrics are computed and before the
  /// early-stopping decision; may rewrite the record.
  std::function<void(EpochRecord&, const TrainedModel&)> on_epoch_end;
  /// Called once features are loaded, with the number of train / monitor clips.
  std::function<void(std::size_t, std::size_t)> on_data_ready;
};

/// Trains `model` in place on the train split, monitoring validation loss on
/// the val split (falling back to test, then train, when absent). On early
/// stop, or at the end of training with monitoring active, the best-epoch
/// weights are restored. Deterministic for a fixed seed.
TrainingLog train(TrainedModel& model, const ClipManifest& manifest, const TrainConfig& cfg,
                  const FeaturePipeline& pipeline, const TrainHooks& hooks = {});

/// Loss and accuracy of clip predictions against labels.
struct ClipScores {
  double loss = 0;
  double accuracy = 0;
};
ClipScores score_distributions(const nn::Tensor& distributions, const std::vector<int>& labels);

/// Loads and encodes every record through the pipeline.
std::vector<nn::Tensor> encode_records(const TrainedModel& model, const std::vector<ClipRecord>& records,
                                       const FeaturePipeline& pipeline);

/// Batched clip distributions for encoded clips.
nn::Tensor predict_batch(const TrainedModel& model, const std::vector<nn::Tensor>& clips, int batch_size = 32);

}  // namespace lipread
