#include "lipread/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>

#include <spdlog/spdlog.h>

#include "lipread/errors.hpp"
#include "lipread/frames.hpp"
#include "lipread/synthetic.hpp"

namespace fs = std::filesystem;

namespace lipread {

std::string participant_from_name(const std::string& name) {
  const auto stem = fs::path(name).stem().string();
  const auto pos = stem.find('_');
  if (pos == std::string::npos || pos == 0) return stem.empty() ? "unknown" : stem;
  return stem.substr(0, pos);
}

ScanResult scan_class_directories(const std::string& root, double default_fps) {
  if (!fs::is_directory(root)) throw IoError("corpus root " + root + " is not a directory");
  const fs::path base = fs::weakly_canonical(fs::absolute(root));

  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(base))
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  std::sort(class_dirs.begin(), class_dirs.end());

  ScanResult result;
  std::vector<ClipRecord> records;
  for (const auto& dir : class_dirs) {
    const std::string label = dir.filename().string();
    std::vector<fs::path> entries;
    for (const auto& entry : fs::directory_iterator(dir)) entries.push_back(entry.path());
    std::sort(entries.begin(), entries.end());
    for (const auto& clip : entries) {
      const std::string path = clip.string();
      const bool is_dir = fs::is_directory(clip);
      if (!is_dir && !is_video_file(path)) continue;
      ClipRecord r;
      r.clip_id = label + "/" + (is_dir ? clip.filename().string() : clip.stem().string());
      r.path = path;
      r.label = label;
      r.participant_id = participant_from_name(clip.filename().string());
      try {
        r.frame_count = probe_frame_count(path);
        r.fps = probe_fps(path, default_fps);
      } catch (const Error& e) {
        result.warnings.push_back("UnreadableClip: " + path + ": " + e.what());
        spdlog::warn("skipping unreadable clip {}: {}", path, e.what());
        continue;
      }
      records.push_back(std::move(r));
    }
  }
  if (records.empty()) throw EmptyCorpus("no readable clips under " + root);

  std::vector<std::string> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(r.label);
  result.manifest = ClipManifest(WordVocabulary::from_labels(labels), std::move(records));
  result.manifest.sort();
  return result;
}

WordVocabulary synthetic_vocabulary(int classes) {
  if (classes < 1) throw InvalidArgument("need at least one class");
  const auto defaults = WordVocabulary::default_wordset().words();
  std::vector<std::string> words;
  for (int i = 0; i < classes; ++i) {
    if (static_cast<std::size_t>(i) < defaults.size()) {
      words.push_back(defaults[static_cast<std::size_t>(i)]);
    } else {
      char name[32];
      std::snprintf(name, sizeof(name), "word%02d", i);
      words.emplace_back(name);
    }
  }
  return WordVocabulary::from_labels(words);
}

namespace {

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

std::string clip_name(int participant, int repetition) {
  char name[32];
  std::snprintf(name, sizeof(name), "p%02d_r%03d", participant, repetition);
  return name;
}

}  // namespace

ClipManifest generate_synthetic_corpus(const WordVocabulary& vocab, int clips_per_class, std::uint64_t seed,
                                       const std::string& out_dir, const SyntheticCorpusOptions& opts) {
  if (clips_per_class < 1) throw InvalidArgument("clips_per_class must be >= 1");
  if (vocab.empty()) throw EmptyVocabulary("synthetic corpus needs a vocabulary");
  const int participants = std::max(1, opts.participants);
  const fs::path root = fs::absolute(out_dir).lexically_normal();
  fs::create_directories(root / "clips");

  std::vector<synth::Appearance> looks;
  for (int p = 0; p < participants; ++p) {
    auto rng = seeded_rng(seed, 0xface0000u + static_cast<std::uint64_t>(p));
    looks.push_back(synth::random_appearance(rng));
  }

  std::vector<ClipRecord> records;
  const synth::ClipOptions clip_opts;
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    const std::string& word = vocab.words()[c];
    for (int i = 0; i < clips_per_class; ++i) {
      const int participant = i % participants;
      const std::string name = clip_name(participant, i / participants);
      auto rng = seeded_rng(seed, c + 1, static_cast<std::uint64_t>(i));
      const auto clip = synth::render_clip(static_cast<int>(c), looks[static_cast<std::size_t>(participant)], rng,
                                           clip_opts);
      std::vector<cv::Mat> frames;
      for (const auto& f : clip.frames) frames.push_back(f.rgb);
      const fs::path rel = fs::path("clips") / word / name;
      write_frame_directory(frames, (root / rel).string());

      ClipRecord r;
      r.clip_id = word + "/" + name;
      r.path = (root / rel).string();
      r.label = word;
      r.participant_id = name.substr(0, 3);
      r.frame_count = static_cast<int>(frames.size());
      r.fps = clip_opts.fps;
      records.push_back(std::move(r));
    }
  }

  if (opts.write_recordings) {
    synth::RecordingOptions rec_opts;
    rec_opts.canvas = opts.recording_canvas;
    for (std::size_t c = 0; c < vocab.size(); ++c) {
      for (int p = 0; p < participants; ++p) {
        auto rng = seeded_rng(seed, 0x7ec00000u + c, static_cast<std::uint64_t>(p));
        const auto rec = synth::render_recording(static_cast<int>(c), opts.recording_repetitions,
                                                 looks[static_cast<std::size_t>(p)], rng, rec_opts);
        char name[16];
        std::snprintf(name, sizeof(name), "p%02d.avi", p);
        write_video(rec.frames, (root / "recordings" / vocab.words()[c] / name).string(), rec_opts.fps);
      }
    }
  }

  ClipManifest manifest(vocab, std::move(records), static_cast<std::int64_t>(seed));
  manifest.sort();
  manifest.write((root / "manifest.jsonl").string());
  return manifest;
}

ClipManifest build_dataset(const std::string& input_dir, const std::string& output_dir, const WordVocabulary& vocab,
                           const FaceDetector& detector, const BuildOptions& opts) {
  if (!fs::is_directory(input_dir)) throw IoError("input " + input_dir + " is not a directory");
  const fs::path out = fs::absolute(output_dir).lexically_normal();
  fs::create_directories(out);

  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(input_dir))
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  std::sort(class_dirs.begin(), class_dirs.end());

  std::vector<ClipRecord> records;
  for (const auto& dir : class_dirs) {
    const std::string word = dir.filename().string();
    if (!vocab.contains(word)) {
      spdlog::warn("skipping directory '{}': not in the word list", word);
      continue;
    }
    std::vector<fs::path> recordings;
    for (const auto& entry : fs::directory_iterator(dir))
      if (is_video_file(entry.path().string()) || is_frame_directory(entry.path().string()))
        recordings.push_back(entry.path());
    std::sort(recordings.begin(), recordings.end());

    for (const auto& rec_path : recordings) {
      const std::string participant = rec_path.stem().string();
      const auto frames = read_frames(rec_path.string());
      const double fps = is_video_file(rec_path.string()) ? probe_fps(rec_path.string(), opts.fps) : opts.fps;
      const auto bounds = segment_recording(frames, opts.repetitions, opts.gap, fps);
      FaceTracker tracker(detector, opts.max_face_reuse, opts.crop);
      for (std::size_t k = 0; k < bounds.size(); ++k) {
        std::vector<cv::Mat> crops;
        for (int f = bounds[k].start; f < bounds[k].end; ++f) crops.push_back(tracker.crop(frames[static_cast<std::size_t>(f)]));
        char name[64];
        std::snprintf(name, sizeof(name), "%s_r%02zu", participant.c_str(), k);
        const fs::path rel = fs::path(word) / name;
        write_frame_directory(crops, (out / rel).string());
        ClipRecord r;
        r.clip_id = word + "/" + name;
        r.path = (out / rel).string();
        r.label = word;
        r.participant_id = participant;
        r.frame_count = static_cast<int>(crops.size());
        r.fps = fps;
        records.push_back(std::move(r));
      }
      spdlog::info("{}: {} clips from {}", word, bounds.size(), rec_path.string());
    }
  }
  if (records.empty()) throw EmptyCorpus("no recordings found under " + input_dir);
  ClipManifest manifest(vocab, std::move(records));
  manifest.sort();
  manifest.write((out / "manifest.jsonl").string());
  return manifest;
}

}  // namespace lipread
