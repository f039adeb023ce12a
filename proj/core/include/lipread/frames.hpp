#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "lipread/temporal.hpp"

namespace lipread {

inline constexpr int kFrameSize = 300;

/// Clip tensor of shape (frames, height, width, 3), RGB, values in [0, 1].
struct FrameSequence {
  static constexpr int kChannels = 3;

  int frames = 0;
  int height = kFrameSize;
  int width = kFrameSize;
  std::vector<float> data;
  double fps = 20.0;
  std::string clip_id;

  std::size_t frame_stride() const noexcept {
    return static_cast<std::size_t>(height) * width * kChannels;
  }
  const float* frame(int t) const { return data.data() + frame_stride() * static_cast<std::size_t>(t); }
  float* frame(int t) { return data.data() + frame_stride() * static_cast<std::size_t>(t); }
  float at(int t, int y, int x, int c) const {
    return frame(t)[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
};

bool is_video_file(const std::string& path);
bool is_frame_directory(const std::string& path);

/// Decodes every frame of a video file or frame directory as 8-bit RGB.
/// Throws DecodeError.
std::vector<cv::Mat> read_frames(const std::string& path);
/// Frame count without decoding pixels where the container allows it.
int probe_frame_count(const std::string& path);
/// Container frame rate; `fallback` for frame directories.
double probe_fps(const std::string& path, double fallback = 20.0);

/// Aspect-preserving resize into a black `size`x`size` canvas. `content`
/// receives the placed image rectangle.
cv::Mat letterbox(const cv::Mat& rgb, int size = kFrameSize, cv::Rect* content = nullptr);

/// Letterboxes RGB images to 300x300 and scales pixels to [0, 1].
FrameSequence to_frame_sequence(const std::vector<cv::Mat>& rgb, double fps = 20.0, std::string clip_id = {});
std::vector<cv::Mat> to_images(const FrameSequence& seq);

FrameSequence decode_clip(const std::string& path);

/// Exactly `target` frames: center crop when longer, last-frame repetition
/// when shorter. Same index rule as the landmark standardizer.
FrameSequence standardize_frames(const FrameSequence& seq, std::size_t target = kStandardFrames);

/// Lossless frame directory: 00000.png, 00001.png, ...
void write_frame_directory(const std::vector<cv::Mat>& rgb, const std::string& dir);
void write_frame_directory(const FrameSequence& seq, const std::string& dir);

/// Lossless FFV1 video container.
void write_video(const std::vector<cv::Mat>& rgb, const std::string& path, double fps);

}  // namespace lipread
