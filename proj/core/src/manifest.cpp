#include "lipread/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lipread/errors.hpp"
#include "lipread/hashing.hpp"

namespace lipread {

using nlohmann::json;

std::string tool_version() { return std::string("lipread ") + LIPREAD_VERSION; }

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::unassigned: break;
  }
  return "unassigned";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  if (name == "unassigned") return Split::unassigned;
  throw InvalidArgument("unknown split '" + name + "'");
}

ClipManifest::ClipManifest(WordVocabulary vocab, std::vector<ClipRecord> records,
                           std::optional<std::int64_t> seed)
    : vocab_(std::move(vocab)), records_(std::move(records)), seed_(seed), created_with_(tool_version()) {}

std::map<std::string, std::size_t> ClipManifest::class_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& w : vocab_.words()) counts[w] = 0;
  for (const auto& r : records_) ++counts[r.label];
  return counts;
}

std::vector<ClipRecord> ClipManifest::in_split(Split split) const {
  std::vector<ClipRecord> out;
  std::copy_if(records_.begin(), records_.end(), std::back_inserter(out),
               [split](const ClipRecord& r) { return r.split == split; });
  return out;
}

bool ClipManifest::has_assigned_splits() const {
  return std::any_of(records_.begin(), records_.end(),
                     [](const ClipRecord& r) { return r.split != Split::unassigned; });
}

void ClipManifest::validate() const {
  std::set<std::string> ids;
  for (const auto& r : records_) {
    if (!ids.insert(r.clip_id).second) throw InvalidArgument("duplicate clip id " + r.clip_id);
    if (!vocab_.contains(r.label)) throw InvalidArgument("clip " + r.clip_id + " has unknown label " + r.label);
    if (r.frame_count < 1) throw InvalidArgument("clip " + r.clip_id + " has no frames");
    if (!(r.fps > 0)) throw InvalidArgument("clip " + r.clip_id + " has non-positive fps");
  }
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json record_to_json(const ClipRecord& r) {
  ordered_json j;
  j["type"] = "clip";
  j["clip_id"] = r.clip_id;
  j["path"] = r.path;
  j["label"] = r.label;
  j["participant_id"] = r.participant_id;
  j["frame_count"] = r.frame_count;
  j["fps"] = r.fps;
  j["split"] = to_string(r.split);
  return j;
}

ClipRecord record_from_json(const json& j) {
  ClipRecord r;
  r.clip_id = j.at("clip_id").get<std::string>();
  r.path = j.at("path").get<std::string>();
  r.label = j.at("label").get<std::string>();
  r.participant_id = j.value("participant_id", std::string("unknown"));
  r.frame_count = j.at("frame_count").get<int>();
  r.fps = j.at("fps").get<double>();
  r.split = parse_split(j.value("split", std::string("unassigned")));
  return r;
}

}  // namespace

std::string ClipManifest::content_hash() const {
  std::ostringstream os;
  for (const auto& w : vocab_.words()) os << w << '\n';
  for (const auto& r : records_) os << record_to_json(r).dump() << '\n';
  return sha256_hex(os.str());
}

void ClipManifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path);
  ordered_json header;
  header["type"] = "header";
  header["vocab"] = vocab_.words();
  header["seed"] = seed_ ? ordered_json(*seed_) : ordered_json(nullptr);
  header["created_with"] = created_with_.empty() ? tool_version() : created_with_;
  ordered_json counts = ordered_json::object();
  for (const auto& [word, n] : class_counts()) counts[word] = n;
  header["class_counts"] = counts;
  out << header.dump() << '\n';
  // Paths under the manifest's directory are stored relative to it.
  const auto base = std::filesystem::absolute(path).parent_path().lexically_normal();
  for (auto r : records_) {
    const std::filesystem::path p(r.path);
    if (p.is_absolute()) {
      const auto rel = p.lexically_normal().lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") r.path = rel.generic_string();
    }
    out << record_to_json(r).dump() << '\n';
  }
  if (!out) throw IoError("failed writing manifest " + path);
}

ClipManifest ClipManifest::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  ClipManifest m;
  const auto base = std::filesystem::absolute(path).parent_path().lexically_normal();
  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (j.value("type", std::string("clip")) == "header") {
      m.vocab_ = WordVocabulary::from_labels(j.at("vocab").get<std::vector<std::string>>());
      if (!j.at("seed").is_null()) m.seed_ = j.at("seed").get<std::int64_t>();
      m.created_with_ = j.value("created_with", std::string());
      have_header = true;
    } else {
      try {
        auto r = record_from_json(j);
        if (std::filesystem::path(r.path).is_relative()) r.path = (base / r.path).lexically_normal().string();
        m.records_.push_back(std::move(r));
      } catch (const json::exception& e) {
        throw InvalidArgument(path + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  if (!have_header) throw InvalidArgument(path + ": missing manifest header line");
  return m;
}

void ClipManifest::sort() {
  std::sort(records_.begin(), records_.end(),
            [](const ClipRecord& a, const ClipRecord& b) { return a.clip_id < b.clip_id; });
}

}  // namespace lipread
