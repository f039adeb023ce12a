#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lipread/vocabulary.hpp"

namespace lipread {

enum class Split { unassigned, train, val, test };

std::string to_string(Split split);
Split parse_split(const std::string& name);

struct ClipRecord {
  std::string clip_id;
  std::string path;
  std::string label;
  std::string participant_id;
  int frame_count = 0;
  double fps = 20.0;
  Split split = Split::unassigned;

  bool operator==(const ClipRecord&) const = default;
};

/// Catalog of word clips. Serialized as JSON lines: a header line carrying
/// the vocabulary, seed and tool version, followed by one record per line.
class ClipManifest {
 public:
  ClipManifest() = default;
  ClipManifest(WordVocabulary vocab, std::vector<ClipRecord> records,
               std::optional<std::int64_t> seed = std::nullopt);

  const WordVocabulary& vocab() const noexcept { return vocab_; }
  const std::vector<ClipRecord>& records() const noexcept { return records_; }
  std::vector<ClipRecord>& mutable_records() noexcept { return records_; }
  std::optional<std::int64_t> seed() const noexcept { return seed_; }
  void set_seed(std::optional<std::int64_t> seed) { seed_ = seed; }
  const std::string& created_with() const noexcept { return created_with_; }

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  /// Record count for every vocabulary word, including zeros.
  std::map<std::string, std::size_t> class_counts() const;
  std::vector<ClipRecord> in_split(Split split) const;
  bool has_assigned_splits() const;

  /// Checks unique clip ids, labels in vocabulary, frame_count >= 1, fps > 0.
  void validate() const;
  /// Stable content hash over records and vocabulary (hex string).
  std::string content_hash() const;

  void write(const std::string& path) const;
  static ClipManifest read(const std::string& path);

  /// Sorts records by clip id.
  void sort();

 private:
  WordVocabulary vocab_;
  std::vector<ClipRecord> records_;
  std::optional<std::int64_t> seed_;
  std::string created_with_;
};

/// Tool version string stamped into manifests and checkpoints.
std::string tool_version();

}  // namespace lipread
