#include "lipread/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "lipread/errors.hpp"
#include "lipread/hashing.hpp"
#include "lipread/manifest.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace lipread {
namespace {

constexpr const char* kMetaFile = "model.json";
constexpr const char* kWeightsFile = "weights.bin";

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume a little-endian host");

ordered_json spec_to_json(const ModelSpec& s) {
  const auto& hp = s.hyperparams;
  return {{"method", to_string(s.method)},
          {"backbone", to_string(s.backbone)},
          {"num_classes", s.num_classes},
          {"input_shape", s.input_shape},
          {"seed", s.seed},
          {"hyperparams",
           {{"dropout", hp.dropout},
            {"width", hp.width},
            {"lstm_hidden", hp.lstm_hidden},
            {"dense_hidden", hp.dense_hidden},
            {"stem_pool", hp.stem_pool},
            {"motion_gain", hp.motion_gain},
            {"learning_rate", hp.learning_rate}}}};
}

ModelSpec spec_from_json(const ordered_json& j) {
  ModelSpec s;
  s.method = parse_method(j.at("method").get<std::string>());
  s.backbone = parse_backbone(j.at("backbone").get<std::string>());
  s.num_classes = j.at("num_classes").get<int>();
  s.input_shape = j.at("input_shape").get<std::vector<int>>();
  s.seed = j.at("seed").get<std::uint64_t>();
  const auto& h = j.at("hyperparams");
  s.hyperparams.dropout = h.at("dropout").get<double>();
  s.hyperparams.width = h.at("width").get<int>();
  s.hyperparams.lstm_hidden = h.at("lstm_hidden").get<int>();
  s.hyperparams.dense_hidden = h.at("dense_hidden").get<int>();
  s.hyperparams.stem_pool = h.at("stem_pool").get<int>();
  s.hyperparams.motion_gain = h.value("motion_gain", 0.0);
  s.hyperparams.learning_rate = h.at("learning_rate").get<double>();
  return s;
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingCheckpoint("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

bool is_checkpoint_dir(const std::string& dir) {
  return fs::is_regular_file(fs::path(dir) / kMetaFile) && fs::is_regular_file(fs::path(dir) / kWeightsFile);
}

void save_model(const TrainedModel& model, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir + ": " + ec.message());

  std::string blob;
  ordered_json params = ordered_json::array();
  for (const auto* p : model.parameters()) {
    const auto bytes = p->value.size() * sizeof(double);
    const auto offset = blob.size();
    blob.resize(offset + bytes);
    std::memcpy(blob.data() + offset, p->value.data(), bytes);
    params.push_back({{"name", p->name}, {"shape", p->value.shape()}});
  }

  ordered_json meta;
  meta["format"] = "lipread-checkpoint";
  meta["format_version"] = kCheckpointFormatVersion;
  meta["created_with"] = tool_version();
  meta["spec"] = spec_to_json(model.spec());
  meta["vocab"] = model.vocab().words();
  meta["fingerprint"] = {{"seed", model.fingerprint().seed}, {"data_hash", model.fingerprint().data_hash}};
  meta["metadata"] = model.metadata();
  meta["parameters"] = params;
  meta["weights"] = {{"file", kWeightsFile}, {"bytes", blob.size()}, {"sha256", sha256_hex(std::string_view(blob))}};

  const fs::path base(dir);
  {
    std::ofstream out(base / kWeightsFile, std::ios::binary | std::ios::trunc);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw IoError("cannot write " + (base / kWeightsFile).string());
  }
  std::ofstream out(base / kMetaFile, std::ios::trunc);
  out << meta.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + (base / kMetaFile).string());
}

TrainedModel load_model(const std::string& dir) {
  const fs::path base(dir);
  if (!fs::is_directory(base)) throw MissingCheckpoint("no checkpoint directory at " + dir);
  if (!fs::is_regular_file(base / kMetaFile)) throw MissingCheckpoint("missing " + (base / kMetaFile).string());
  if (!fs::is_regular_file(base / kWeightsFile))
    throw MissingCheckpoint("missing " + (base / kWeightsFile).string());

  ordered_json meta;
  ModelSpec spec;
  std::vector<std::string> words;
  try {
    meta = ordered_json::parse(read_all(base / kMetaFile));
    if (meta.at("format").get<std::string>() != "lipread-checkpoint")
      throw CorruptCheckpoint("not a lipread checkpoint");
    if (meta.at("format_version").get<int>() != kCheckpointFormatVersion)
      throw CorruptCheckpoint("unsupported checkpoint format version");
    spec = spec_from_json(meta.at("spec"));
    words = meta.at("vocab").get<std::vector<std::string>>();
  } catch (const CorruptCheckpoint&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptCheckpoint("unreadable checkpoint metadata in " + dir + ": " + e.what());
  }

  const std::string blob = read_all(base / kWeightsFile);
  const auto& w = meta.at("weights");
  if (blob.size() != w.at("bytes").get<std::size_t>())
    throw CorruptCheckpoint("weights blob has " + std::to_string(blob.size()) + " bytes, expected " +
                            std::to_string(w.at("bytes").get<std::size_t>()));
  if (sha256_hex(std::string_view(blob)) != w.at("sha256").get<std::string>())
    throw CorruptCheckpoint("weights hash mismatch in " + dir);

  TrainedModel model = [&] {
    try {
      return TrainedModel(spec, WordVocabulary::from_labels(words));
    } catch (const InvalidSpec& e) {
      throw CorruptCheckpoint(std::string("checkpoint spec is invalid: ") + e.what());
    }
  }();
  if (model.vocab().words() != words) throw CorruptCheckpoint("checkpoint vocabulary is not in class order");

  std::size_t offset = 0;
  for (auto* p : model.parameters()) {
    const auto bytes = p->value.size() * sizeof(double);
    if (offset + bytes > blob.size()) throw CorruptCheckpoint("weights blob shorter than the network");
    std::memcpy(p->value.data(), blob.data() + offset, bytes);
    offset += bytes;
  }
  if (offset != blob.size()) throw CorruptCheckpoint("weights blob does not match the network");

  const auto& fp = meta.at("fingerprint");
  model.set_fingerprint({fp.at("seed").get<std::uint64_t>(), fp.at("data_hash").get<std::string>()});
  for (const auto& [k, v] : meta.at("metadata").items()) model.metadata()[k] = v.get<std::string>();
  return model;
}

}  // namespace lipread
