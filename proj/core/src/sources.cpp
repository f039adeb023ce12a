#include "lipread/sources.hpp"

#include <cmath>
#include <sstream>
#include <thread>

#include <opencv2/imgproc.hpp>

#include "lipread/errors.hpp"
#include "lipread/frames.hpp"

namespace lipread {

std::vector<ScriptSegment> parse_synth_script(const std::string& text, const WordVocabulary* vocab) {
  std::vector<ScriptSegment> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw InvalidArgument("script item '" + item + "' must be CLASS:SECONDS");
    const std::string who = item.substr(0, colon);
    ScriptSegment seg;
    try {
      seg.seconds = std::stod(item.substr(colon + 1));
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad duration in script item '" + item + "'");
    }
    if (!(seg.seconds > 0)) throw InvalidArgument("script durations must be positive");
    if (who == "rest") {
      seg.class_id = -1;
    } else if (!who.empty() && std::all_of(who.begin(), who.end(), [](unsigned char c) { return std::isdigit(c); })) {
      seg.class_id = std::stoi(who);
    } else if (vocab && vocab->contains(who)) {
      seg.class_id = vocab->id(who);
    } else {
      throw InvalidArgument("unknown script class '" + who + "'");
    }
    out.push_back(seg);
  }
  if (out.empty()) throw InvalidArgument("empty synthetic script");
  return out;
}

SynthScriptSource::SynthScriptSource(std::vector<ScriptSegment> script, std::uint64_t seed, double fps, bool paced,
                                     cv::Size canvas)
    : script_(std::move(script)), fps_(fps), paced_(paced), canvas_(canvas), rng_(seed) {
  look_ = synth::random_appearance(rng_);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& seg : script_) {
    total_frames_ += std::max(1, static_cast<int>(std::lround(seg.seconds * fps_)));
    segment_end_.push_back(total_frames_);
    synth::MotifVariation var;
    var.phase = unit(rng_);
    var.rate = 0.95 + 0.1 * unit(rng_);
    var.amplitude = 0.85 + 0.3 * unit(rng_);
    variation_.push_back(var);
  }
}

int SynthScriptSource::segment_at(int index) const {
  for (std::size_t s = 0; s < segment_end_.size(); ++s)
    if (index < segment_end_[s]) return static_cast<int>(s);
  return -1;
}

std::optional<cv::Mat> SynthScriptSource::next() {
  const int seg = segment_at(index_);
  if (seg < 0) return std::nullopt;
  if (index_ == 0) start_ = std::chrono::steady_clock::now();
  if (paced_)
    std::this_thread::sleep_until(start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                               std::chrono::duration<double>(index_ / fps_)));
  const int begin = seg == 0 ? 0 : segment_end_[static_cast<std::size_t>(seg) - 1];
  const auto& s = script_[static_cast<std::size_t>(seg)];
  const double t = (index_ - begin) / fps_;
  const auto shape = s.class_id < 0 ? synth::rest_shape()
                                    : synth::motif_shape(s.class_id, t, variation_[static_cast<std::size_t>(seg)]);
  ++index_;
  return synth::render_face(canvas_, synth::canonical_face_center(canvas_), look_, shape, 0.0, nullptr).rgb;
}

FileSource::FileSource(const std::string& path) : path_(path) {
  if (is_frame_directory(path)) {
    frames_ = read_frames(path);
    return;
  }
  if (!capture_.open(path)) throw DecodeError("cannot open video " + path);
  const double fps = capture_.get(cv::CAP_PROP_FPS);
  if (fps > 0) fps_ = fps;
}

std::optional<cv::Mat> FileSource::next() {
  if (!capture_.isOpened()) {
    if (next_ >= frames_.size()) return std::nullopt;
    return frames_[next_++];
  }
  cv::Mat bgr, rgb;
  if (!capture_.read(bgr) || bgr.empty()) return std::nullopt;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return rgb;
}

CameraSource::CameraSource(int index) : index_(index) {
  if (!capture_.open(index)) throw DecodeError("cannot open camera " + std::to_string(index));
  const double fps = capture_.get(cv::CAP_PROP_FPS);
  if (fps > 0) fps_ = fps;
}

std::optional<cv::Mat> CameraSource::next() {
  cv::Mat bgr, rgb;
  if (!capture_.read(bgr) || bgr.empty()) return std::nullopt;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return rgb;
}

std::unique_ptr<FrameSource> make_source(const std::string& spec, const WordVocabulary* vocab, std::uint64_t seed,
                                         bool paced) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "synth") return std::make_unique<SynthScriptSource>(parse_synth_script(arg, vocab), seed, 20.0, paced);
  if (kind == "file") return std::make_unique<FileSource>(arg);
  if (kind == "camera") {
    try {
      return std::make_unique<CameraSource>(arg.empty() ? 0 : std::stoi(arg));
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad camera index in '" + spec + "'");
    }
  }
  throw InvalidArgument("unknown source '" + spec + "' (camera:N, file:PATH, synth:SCRIPT)");
}

}  // namespace lipread
