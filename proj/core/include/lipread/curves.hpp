#pragma once

#include <string>

#include "lipread/training.hpp"

namespace lipread {

struct CurveFiles {
  std::string table;     // training_log.csv, the source of truth
  std::string accuracy;  // accuracy.png
  std::string loss;      // loss.png
};

/// Writes the per-epoch table and the accuracy and loss plots (train and
/// val series) into `out_dir`.
CurveFiles emit_curves(const TrainingLog& log, const std::string& out_dir);

/// Reads a table written by emit_curves. Values round-trip exactly.
std::vector<EpochRecord> read_training_table(const std::string& path);

/// training_summary.json: stop reason, best epoch, monitored split and the
/// last and best epoch records.
void write_training_summary(const TrainingLog& log, const std::string& path);
TrainingLog read_training_summary(const std::string& path);

}  // namespace lipread
