#pragma once

#include <string>

#include "lipread/models.hpp"

namespace lipread {

inline constexpr int kCheckpointFormatVersion = 1;

/// Writes `<dir>/model.json` (spec, vocabulary, fingerprint, metadata and the
/// weights hash) and `<dir>/weights.bin` (little-endian float64 parameters).
void save_model(const TrainedModel& model, const std::string& dir);

/// Throws MissingCheckpoint when the directory or a file is absent and
/// CorruptCheckpoint when the metadata is unreadable or the weights do not
/// match their recorded size and hash.
TrainedModel load_model(const std::string& dir);

bool is_checkpoint_dir(const std::string& dir);

}  // namespace lipread
