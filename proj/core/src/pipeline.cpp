#include "lipread/pipeline.hpp"

#include <filesystem>

#include "lipread/frames.hpp"
#include "lipread/temporal.hpp"

namespace fs = std::filesystem;

namespace lipread {

Features FramePipeline::from_record(const ClipRecord& record) const {
  FrameSequence seq = decode_clip(record.path);
  seq.fps = record.fps;
  seq.clip_id = record.clip_id;
  return standardize_frames(seq);
}

Features FramePipeline::from_frames(const std::vector<cv::Mat>& rgb, double fps, const std::string& clip_id) const {
  // Same result as standardizing the converted clip, without converting frames it drops.
  std::vector<cv::Mat> kept;
  for (const auto i : standard_frame_indices(rgb.size())) kept.push_back(rgb[i]);
  return to_frame_sequence(kept, fps, clip_id);
}

std::string LandmarkPipeline::cache_file(const std::string& dir, const std::string& clip_id) {
  std::string name = clip_id;
  for (auto& ch : name)
    if (ch == '/' || ch == '\\') ch = '_';
  return (fs::path(dir) / (name + ".lmk")).string();
}

Features LandmarkPipeline::from_record(const ClipRecord& record) const {
  if (cache_dir_) {
    const auto path = cache_file(*cache_dir_, record.clip_id);
    if (fs::is_regular_file(path)) return normalize(standardize_length(read_landmark_file(path)));
  }
  auto seq = extract_landmarks(read_frames(record.path), *detector_, record.clip_id, record.fps);
  return normalize(standardize_length(seq));
}

Features LandmarkPipeline::from_frames(const std::vector<cv::Mat>& rgb, double fps,
                                       const std::string& clip_id) const {
  return normalize(standardize_length(extract_landmarks(rgb, *detector_, clip_id, fps)));
}

std::unique_ptr<FeaturePipeline> make_pipeline(Method method, const std::string& landmark_detector,
                                               std::optional<std::string> landmark_cache) {
  if (method != Method::indirect_cnn) return std::make_unique<FramePipeline>();
  return std::make_unique<LandmarkPipeline>(make_landmark_detector(landmark_detector), std::move(landmark_cache));
}

}  // namespace lipread
