#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/videoio.hpp>

#include "lipread/synthetic.hpp"
#include "lipread/vocabulary.hpp"

namespace lipread {

/// A stream of RGB frames. `next` returns nothing once the stream is closed.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<cv::Mat> next() = 0;
  virtual double fps() const = 0;
  /// Live sources cannot be paused; the loop drops frames instead of blocking them.
  virtual bool live() const = 0;
  virtual std::string describe() const = 0;
};

/// One segment of a synthetic script: a class motif (or the closed mouth when
/// `class_id` is negative) held for `seconds`.
struct ScriptSegment {
  int class_id = -1;
  double seconds = 0;
};

/// Parses "3:2,5:2" or "bro:2,salam:2" (words need `vocab`); "rest" is the
/// closed mouth.
std::vector<ScriptSegment> parse_synth_script(const std::string& text, const WordVocabulary* vocab = nullptr);

/// Renders a scripted performance by one synthetic speaker.
class SynthScriptSource final : public FrameSource {
 public:
  SynthScriptSource(std::vector<ScriptSegment> script, std::uint64_t seed, double fps = 20.0,
                    bool paced = false, cv::Size canvas = {300, 300});

  std::optional<cv::Mat> next() override;
  double fps() const override { return fps_; }
  bool live() const override { return paced_; }
  std::string describe() const override { return "synth"; }

  /// Segment index active at frame `index`, or -1 past the end.
  int segment_at(int index) const;
  int total_frames() const { return total_frames_; }
  const std::vector<ScriptSegment>& script() const { return script_; }

 private:
  std::vector<ScriptSegment> script_;
  std::vector<int> segment_end_;  // exclusive frame index
  std::vector<synth::MotifVariation> variation_;
  double fps_;
  bool paced_;
  cv::Size canvas_;
  synth::Appearance look_;
  std::mt19937_64 rng_;
  int index_ = 0;
  int total_frames_ = 0;
  std::chrono::steady_clock::time_point start_;
};

/// Video file or frame directory, replayed at full speed.
class FileSource final : public FrameSource {
 public:
  explicit FileSource(const std::string& path);
  std::optional<cv::Mat> next() override;
  double fps() const override { return fps_; }
  bool live() const override { return false; }
  std::string describe() const override { return "file:" + path_; }

 private:
  std::string path_;
  double fps_ = 20.0;
  cv::VideoCapture capture_;
  std::vector<cv::Mat> frames_;  // frame directories are read up front
  std::size_t next_ = 0;
};

class CameraSource final : public FrameSource {
 public:
  explicit CameraSource(int index);
  std::optional<cv::Mat> next() override;
  double fps() const override { return fps_; }
  bool live() const override { return true; }
  std::string describe() const override { return "camera:" + std::to_string(index_); }

 private:
  int index_;
  double fps_ = 20.0;
  cv::VideoCapture capture_;
};

/// "camera:N", "file:PATH" or "synth:SCRIPT". Throws InvalidArgument or DecodeError.
std::unique_ptr<FrameSource> make_source(const std::string& spec, const WordVocabulary* vocab = nullptr,
                                         std::uint64_t seed = 0, bool paced = false);

}  // namespace lipread
