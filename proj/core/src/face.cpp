#include "lipread/face.hpp"

#include <opencv2/imgproc.hpp>

#include "lipread/errors.hpp"

namespace lipread {

std::optional<cv::Rect> SkinFaceDetector::detect(const cv::Mat& rgb) const {
  if (rgb.empty() || rgb.type() != CV_8UC3) return std::nullopt;
  cv::Mat mask(rgb.size(), CV_8U);
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* px = rgb.ptr<cv::Vec3b>(y);
    auto* m = mask.ptr<uchar>(y);
    for (int x = 0; x < rgb.cols; ++x) {
      const int r = px[x][0], g = px[x][1], b = px[x][2];
      // warm, bright, red > green > blue; lips and eyes fall inside the hull
      m[x] = (r > 95 && g > 40 && b > 20 && r > g && g > b && r - b > 15 && g * 100 > r * 55) ? 255 : 0;
    }
  }
  cv::Mat labels, stats, centroids;
  const int n = cv::connectedComponentsWithStats(mask, labels, stats, centroids, 8, CV_32S);
  int best = -1, best_area = 0;
  for (int i = 1; i < n; ++i) {
    const int area = stats.at<int>(i, cv::CC_STAT_AREA);
    if (area > best_area) best_area = area, best = i;
  }
  if (best < 0 || best_area < 400) return std::nullopt;
  return cv::Rect(stats.at<int>(best, cv::CC_STAT_LEFT), stats.at<int>(best, cv::CC_STAT_TOP),
                  stats.at<int>(best, cv::CC_STAT_WIDTH), stats.at<int>(best, cv::CC_STAT_HEIGHT));
}

std::unique_ptr<FaceDetector> make_face_detector(const std::string& name) {
  if (name == "skin" || name == "synthetic") return std::make_unique<SkinFaceDetector>();
  if (name == "full-frame") return std::make_unique<FullFrameDetector>();
  throw InvalidArgument("unknown face detector '" + name + "' (available: skin, full-frame)");
}

cv::Mat crop_around(const cv::Mat& frame, const cv::Rect& box, int size) {
  if (frame.empty()) throw InvalidArgument("cannot crop an empty frame");
  // Twice the box center minus the crop size, halved with floor, keeps the
  // crop center within half a pixel of the box center.
  auto floor_half = [](int v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); };
  const int left = floor_half(2 * box.x + box.width - size);
  const int top = floor_half(2 * box.y + box.height - size);
  const int pad_l = std::max(0, -left), pad_t = std::max(0, -top);
  const int pad_r = std::max(0, left + size - frame.cols), pad_b = std::max(0, top + size - frame.rows);
  cv::Mat src = frame;
  if (pad_l || pad_t || pad_r || pad_b)
    cv::copyMakeBorder(frame, src, pad_t, pad_b, pad_l, pad_r, cv::BORDER_REPLICATE);
  return src(cv::Rect(left + pad_l, top + pad_t, size, size)).clone();
}

cv::Mat crop_face(const cv::Mat& frame, const FaceDetector& detector, int size) {
  const auto box = detector.detect(frame);
  if (!box) throw NoFaceDetected("no face found in frame");
  return crop_around(frame, *box, size);
}

cv::Mat FaceTracker::crop(const cv::Mat& frame) {
  if (auto box = detector_->detect(frame)) {
    last_ = box;
    misses_ = 0;
    return crop_around(frame, *box, size_);
  }
  ++misses_;
  if (!last_ || misses_ > max_reuse_)
    throw NoFaceDetected("no face found for " + std::to_string(misses_) + " consecutive frames");
  return crop_around(frame, *last_, size_);
}

}  // namespace lipread
