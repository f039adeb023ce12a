#include "lipread/vocabulary.hpp"

#include <algorithm>
#include <fstream>

#include "lipread/errors.hpp"

namespace lipread {

std::map<std::string, int> encode_labels(std::span<const std::string> labels) {
  if (labels.empty()) throw EmptyVocabulary("no labels to encode");
  std::vector<std::string> unique(labels.begin(), labels.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::map<std::string, int> encoding;
  for (std::size_t i = 0; i < unique.size(); ++i) encoding.emplace(unique[i], static_cast<int>(i));
  return encoding;
}

WordVocabulary WordVocabulary::from_labels(std::span<const std::string> labels) {
  WordVocabulary vocab;
  const auto encoding = encode_labels(labels);
  vocab.words_.resize(encoding.size());
  for (const auto& [word, id] : encoding) vocab.words_[static_cast<std::size_t>(id)] = word;
  return vocab;
}

WordVocabulary WordVocabulary::default_wordset() {
  // Hello, Go, Come, Goodbye, Surena, Take, Write.
  static const std::vector<std::string> kWords = {"salam", "bro",    "bia",    "khodahafez",
                                                  "surena", "begir", "benevis"};
  return from_labels(kWords);
}

WordVocabulary WordVocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(first, last - first + 1));
  }
  return from_labels(words);
}

const std::string& WordVocabulary::word(int class_id) const {
  if (class_id < 0 || static_cast<std::size_t>(class_id) >= words_.size())
    throw InvalidArgument("class id " + std::to_string(class_id) + " outside vocabulary");
  return words_[static_cast<std::size_t>(class_id)];
}

int WordVocabulary::id(const std::string& word) const {
  const auto it = std::lower_bound(words_.begin(), words_.end(), word);
  if (it == words_.end() || *it != word) throw InvalidArgument("'" + word + "' is not in the vocabulary");
  return static_cast<int>(it - words_.begin());
}

bool WordVocabulary::contains(const std::string& word) const {
  return std::binary_search(words_.begin(), words_.end(), word);
}

}  // namespace lipread
