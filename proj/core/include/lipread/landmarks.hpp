#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "lipread/frames.hpp"
#include "lipread/temporal.hpp"

namespace lipread {

/// Mouth region of the 68-point layout: indices 48..67.
inline constexpr int kFirstMouthPoint = 48;
inline constexpr int kMouthPoints = 20;

using FaceLandmarks68 = std::array<cv::Point2d, 68>;
using MouthPoints = std::array<cv::Point2d, kMouthPoints>;

std::array<int, kMouthPoints> mouth_point_indices();

struct LandmarkFrame {
  MouthPoints points{};
  bool valid = false;
};

struct LandmarkSequence {
  std::vector<LandmarkFrame> frames;
  double fps = 20.0;
  std::string clip_id;

  std::size_t valid_count() const;
};

/// (frame, point, coord) tensor. After `normalize` every frame is centered
/// on its mouth centroid and the sequence has unit RMS point radius.
struct LipTensor {
  struct Normalization {
    bool applied = false;
    std::vector<cv::Point2d> centroids;  // per frame, subtracted
    double scale = 1.0;                  // divisor applied after centering
  };

  int frames = static_cast<int>(kStandardFrames);
  std::vector<double> data;  // frames * kMouthPoints * 2
  Normalization normalization;

  double at(int t, int p, int c) const { return data[(static_cast<std::size_t>(t) * kMouthPoints + p) * 2 + c]; }
  double& at(int t, int p, int c) { return data[(static_cast<std::size_t>(t) * kMouthPoints + p) * 2 + c]; }
};

/// Pluggable 68-point landmark detector.
class LandmarkDetector {
 public:
  virtual ~LandmarkDetector() = default;
  virtual std::optional<FaceLandmarks68> detect(const cv::Mat& rgb) const = 0;
};

/// Colour-segmentation detector for the synthetic face renderer: the lip
/// and inner-mouth regions are segmented by hue, ellipses are fitted from
/// image moments and the 20 mouth points are placed on them. Non-mouth
/// points are coarse estimates from the mouth position. Assumes an upright
/// face. With `jitter_px` > 0 every mouth point gets Gaussian localization
/// error of that sigma, seeded from the frame content so the same image
/// always yields the same points.
class ColorMouthDetector final : public LandmarkDetector {
 public:
  explicit ColorMouthDetector(double jitter_px = 0.0) : jitter_px_(jitter_px) {}
  std::optional<FaceLandmarks68> detect(const cv::Mat& rgb) const override;
  double jitter_px() const noexcept { return jitter_px_; }

 private:
  double jitter_px_;
};

/// Localization error of the "synthetic" detector, pixels on a 300x300 crop.
inline constexpr double kSyntheticDetectorJitterPx = 3.0;

/// "synthetic": colour detector with kSyntheticDetectorJitterPx error, the
/// stand-in for a trained 68-point model. "color": the same detector without
/// added error.
std::unique_ptr<LandmarkDetector> make_landmark_detector(const std::string& name);

/// Selects the mouth subset of each frame; failed detections are kept as
/// invalid frames. Throws AllFramesInvalid if no frame is usable.
LandmarkSequence extract_landmarks(const std::vector<cv::Mat>& rgb_frames, const LandmarkDetector& detector,
                                   std::string clip_id = {}, double fps = 20.0);
LandmarkSequence extract_landmarks(const FrameSequence& clip, const LandmarkDetector& detector);

/// Repairs invalid frames by linear interpolation between the nearest valid
/// neighbours (edges copy the nearest valid frame), then center-crops or
/// pads to `target` frames.
LandmarkSequence standardize_length(const LandmarkSequence& seq, std::size_t target = kStandardFrames);

/// Per-frame centroid removal and division by the sequence RMS radius.
/// Requires all frames valid. Throws DegenerateGeometry when all points coincide.
LipTensor normalize(const LandmarkSequence& seq);

/// Raw coordinates, no normalization.
LipTensor pack(const LandmarkSequence& seq);
LandmarkSequence unpack(const LipTensor& tensor, double fps = 20.0, std::string clip_id = {});

/// Per-clip landmark cache: header lines then one line per frame of 40
/// numbers with six fractional digits, or `invalid`.
void write_landmark_file(const LandmarkSequence& seq, const std::string& path);
LandmarkSequence read_landmark_file(const std::string& path);

}  // namespace lipread
