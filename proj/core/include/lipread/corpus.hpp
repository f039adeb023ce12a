#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "lipread/face.hpp"
#include "lipread/manifest.hpp"
#include "lipread/vocabulary.hpp"

namespace lipread {

/// Frame range [start, end) of one spoken word inside a recording.
struct ClipBoundary {
  int start = 0;
  int end = 0;
  int length() const noexcept { return end - start; }
  bool operator==(const ClipBoundary&) const = default;
};

/// Mean absolute pixel difference between consecutive frames; element i
/// compares frame i with frame i-1 (element 0 is 0).
std::vector<double> motion_energy(const std::vector<cv::Mat>& frames);

/// Splits a recording into `word_count` single-word clips using stillness
/// troughs of the motion energy as cut points. `gap` is the nominal
/// silence between repetitions in seconds. Throws SegmentationError when
/// fewer motion bursts than words are found.
std::vector<ClipBoundary> segment_recording(const std::vector<cv::Mat>& frames, int word_count, double gap,
                                            double fps);
/// Decodes `path` first; throws DecodeError when unreadable.
std::vector<ClipBoundary> segment_recording(const std::string& path, int word_count, double gap);

struct ScanResult {
  ClipManifest manifest;
  std::vector<std::string> warnings;  // unreadable clips, excluded
};

/// One record per clip (video file or frame directory) found under each
/// immediate subdirectory of `root`; the subdirectory name is the label.
/// Throws EmptyCorpus when nothing readable is found.
ScanResult scan_class_directories(const std::string& root, double default_fps = 20.0);

/// Participant id encoded in a clip name: the part before the first '_'.
std::string participant_from_name(const std::string& name);

struct SyntheticCorpusOptions {
  int participants = 4;
  bool write_recordings = false;   // also emit raw multi-word recordings
  int recording_repetitions = 5;
  cv::Size recording_canvas{640, 360};
};

/// Writes `clips_per_class` synthetic clips per word under `<out>/clips/<word>/`
/// as frame directories, plus `<out>/manifest.jsonl`. Deterministic per seed.
ClipManifest generate_synthetic_corpus(const WordVocabulary& vocab, int clips_per_class, std::uint64_t seed,
                                       const std::string& out_dir, const SyntheticCorpusOptions& opts = {});

/// Vocabulary of the first `classes` default words (or generated names
/// beyond seven).
WordVocabulary synthetic_vocabulary(int classes);

struct BuildOptions {
  int repetitions = 20;   // words per recording
  double gap = 1.0;       // seconds of stillness between repetitions
  double fps = 20.0;
  int crop = kCropSize;
  int max_face_reuse = 5;
};

/// Builds the clip corpus from raw recordings laid out as
/// `<input>/<word>/<participant>.<ext>` (video or frame directory):
/// segments each recording, face-crops every frame and writes
/// `<output>/<word>/<participant>_rNN/` frame directories and
/// `<output>/manifest.jsonl`.
ClipManifest build_dataset(const std::string& input_dir, const std::string& output_dir, const WordVocabulary& vocab,
                           const FaceDetector& detector, const BuildOptions& opts = {});

}  // namespace lipread
