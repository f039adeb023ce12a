#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace lipread {

/// Maps each unique label to its position in lexicographic order.
/// Throws EmptyVocabulary for an empty input. Duplicates are allowed.
std::map<std::string, int> encode_labels(std::span<const std::string> labels);

/// Closed, ordered word set with a bijective integer encoding onto {0..N-1}.
/// Class ids follow lexicographic order of the words.
class WordVocabulary {
 public:
  WordVocabulary() = default;

  static WordVocabulary from_labels(std::span<const std::string> labels);
  /// The seven command words of the Persian wordset.
  static WordVocabulary default_wordset();
  /// One word per line; blank lines and '#' comments ignored.
  static WordVocabulary load(const std::string& path);

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::string& word(int class_id) const;
  int id(const std::string& word) const;
  bool contains(const std::string& word) const;

  bool operator==(const WordVocabulary&) const = default;

 private:
  std::vector<std::string> words_;
};

}  // namespace lipread
