#pragma once

#include <memory>
#include <optional>
#include <string>

#include <opencv2/core.hpp>

namespace lipread {

inline constexpr int kCropSize = 300;

/// Pluggable face detector. Implementations return the face bounding box of
/// an RGB frame or nothing when no face is found.
class FaceDetector {
 public:
  virtual ~FaceDetector() = default;
  virtual std::optional<cv::Rect> detect(const cv::Mat& rgb) const = 0;
};

/// Skin-tone blob detector for the synthetic corpus and plain backgrounds:
/// the largest connected skin-colored region is taken as the face.
class SkinFaceDetector final : public FaceDetector {
 public:
  std::optional<cv::Rect> detect(const cv::Mat& rgb) const override;
};

/// Detector that always reports the same box (tests, pre-aligned input).
class FixedFaceDetector final : public FaceDetector {
 public:
  explicit FixedFaceDetector(std::optional<cv::Rect> box) : box_(box) {}
  std::optional<cv::Rect> detect(const cv::Mat&) const override { return box_; }

 private:
  std::optional<cv::Rect> box_;
};

/// Treats the whole frame as the face (input already aligned).
class FullFrameDetector final : public FaceDetector {
 public:
  std::optional<cv::Rect> detect(const cv::Mat& rgb) const override {
    if (rgb.empty()) return std::nullopt;
    return cv::Rect(0, 0, rgb.cols, rgb.rows);
  }
};

/// "skin" (alias "synthetic") or "full-frame".
std::unique_ptr<FaceDetector> make_face_detector(const std::string& name);

/// `size`x`size` crop centered on the box center; regions beyond the frame
/// are filled by replicating border pixels.
cv::Mat crop_around(const cv::Mat& frame, const cv::Rect& box, int size = kCropSize);

/// Detects the face and returns the centered crop. Throws NoFaceDetected.
cv::Mat crop_face(const cv::Mat& frame, const FaceDetector& detector, int size = kCropSize);

/// Stateful cropping over a video: on a detection miss the last good box is
/// reused for up to `max_reuse` consecutive frames before NoFaceDetected.
class FaceTracker {
 public:
  explicit FaceTracker(const FaceDetector& detector, int max_reuse = 5, int size = kCropSize)
      : detector_(&detector), max_reuse_(max_reuse), size_(size) {}

  cv::Mat crop(const cv::Mat& frame);
  int consecutive_misses() const noexcept { return misses_; }

 private:
  const FaceDetector* detector_;
  int max_reuse_;
  int size_;
  std::optional<cv::Rect> last_;
  int misses_ = 0;
};

}  // namespace lipread
