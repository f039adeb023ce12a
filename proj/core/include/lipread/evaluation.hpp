#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lipread/manifest.hpp"
#include "lipread/models.hpp"
#include "lipread/pipeline.hpp"

namespace lipread {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(WordVocabulary vocab);
  ConfusionMatrix(WordVocabulary vocab, std::vector<std::int64_t> counts);

  void add(int truth, int predicted, std::int64_t count = 1);
  std::int64_t at(int truth, int predicted) const;
  std::size_t size() const noexcept { return vocab_.size(); }
  const WordVocabulary& vocab() const noexcept { return vocab_; }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
  std::int64_t total() const;
  std::int64_t trace() const;

 private:
  WordVocabulary vocab_;
  std::vector<std::int64_t> counts_;  // row-major N x N
};

struct ClassMetrics {
  std::string word;
  std::int64_t support = 0;  // true samples
  double precision = 0, recall = 0, f1 = 0;
  bool precision_degenerate = false;  // nothing predicted as this class
  bool recall_degenerate = false;     // no true samples
  bool f1_degenerate = false;         // precision + recall = 0
};

inline constexpr double kNotMeasured = std::numeric_limits<double>::quiet_NaN();

struct MetricsReport {
  std::string method;
  std::string split = "test";
  std::int64_t samples = 0;
  double accuracy = 0;
  double loss = kNotMeasured;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0, macro_recall = 0, macro_f1 = 0;
  // Last-epoch training figures, when known.
  double train_accuracy = kNotMeasured, train_loss = kNotMeasured;
  double val_accuracy = kNotMeasured, val_loss = kNotMeasured;
};

/// Per-class and macro metrics; zero denominators give 0 with a flag.
MetricsReport compute_metrics(const ConfusionMatrix& matrix, const std::string& method = {});

struct Evaluation {
  ConfusionMatrix matrix;
  MetricsReport report;
  std::vector<Prediction> predictions;  // in manifest order of the split
  std::vector<std::string> clip_ids;
};

/// Predicts every clip of `split` and scores it. Throws EmptySplit.
Evaluation evaluate(const TrainedModel& model, const ClipManifest& manifest, const FeaturePipeline& pipeline,
                    Split split = Split::test);

struct ComparisonRow {
  std::string method;
  double val_acc = kNotMeasured, train_acc = kNotMeasured;
  double val_loss = kNotMeasured, train_loss = kNotMeasured;
  double test_acc = kNotMeasured;
};

/// One row per report, sorted by validation accuracy (descending; unknown
/// last), ties kept in input order.
std::vector<ComparisonRow> compare_methods(std::span<const MetricsReport> reports);

std::string render_comparison(const std::vector<ComparisonRow>& rows);
std::string comparison_json(const std::vector<ComparisonRow>& rows);

std::string render_report(const Evaluation& evaluation);
std::string report_json(const Evaluation& evaluation);
/// Reads the report fields needed for comparison back from report_json output.
MetricsReport read_report(const std::string& path);

}  // namespace lipread
