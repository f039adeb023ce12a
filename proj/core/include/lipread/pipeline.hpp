#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "lipread/landmarks.hpp"
#include "lipread/manifest.hpp"
#include "lipread/models.hpp"

namespace lipread {

/// Turns a clip (from disk or a live window of RGB frames) into the
/// standardized features a model consumes.
class FeaturePipeline {
 public:
  virtual ~FeaturePipeline() = default;
  virtual std::string name() const = 0;
  virtual Features from_record(const ClipRecord& record) const = 0;
  virtual Features from_frames(const std::vector<cv::Mat>& rgb, double fps, const std::string& clip_id) const = 0;
};

/// decode_clip + standardize_frames.
class FramePipeline final : public FeaturePipeline {
 public:
  std::string name() const override { return "frames"; }
  Features from_record(const ClipRecord& record) const override;
  Features from_frames(const std::vector<cv::Mat>& rgb, double fps, const std::string& clip_id) const override;
};

/// extract_landmarks + standardize_length + normalize. When `cache_dir` is
/// set, `<cache_dir>/<clip_id>.lmk` files are read if present.
class LandmarkPipeline final : public FeaturePipeline {
 public:
  explicit LandmarkPipeline(std::shared_ptr<const LandmarkDetector> detector,
                            std::optional<std::string> cache_dir = std::nullopt)
      : detector_(std::move(detector)), cache_dir_(std::move(cache_dir)) {}

  std::string name() const override { return "landmarks"; }
  Features from_record(const ClipRecord& record) const override;
  Features from_frames(const std::vector<cv::Mat>& rgb, double fps, const std::string& clip_id) const override;

  static std::string cache_file(const std::string& dir, const std::string& clip_id);

 private:
  std::shared_ptr<const LandmarkDetector> detector_;
  std::optional<std::string> cache_dir_;
};

/// Frame pipeline for direct methods, landmark pipeline (synthetic detector
/// unless named) for the indirect method.
std::unique_ptr<FeaturePipeline> make_pipeline(Method method, const std::string& landmark_detector = "synthetic",
                                               std::optional<std::string> landmark_cache = std::nullopt);

}  // namespace lipread
