#include "lipread/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lipread/errors.hpp"
#include "lipread/training.hpp"

using ordered_json = nlohmann::ordered_json;

namespace lipread {
namespace {

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

double number_or_nan(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return kNotMeasured;
  return j.at(key).get<double>();
}

std::string cell(double v, const char* fmt = "%.4f") {
  if (!std::isfinite(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(WordVocabulary vocab)
    : vocab_(std::move(vocab)), counts_(vocab_.size() * vocab_.size(), 0) {}

ConfusionMatrix::ConfusionMatrix(WordVocabulary vocab, std::vector<std::int64_t> counts)
    : vocab_(std::move(vocab)), counts_(std::move(counts)) {
  if (counts_.size() != vocab_.size() * vocab_.size()) throw ShapeMismatch("confusion counts must be N x N");
  for (auto c : counts_)
    if (c < 0) throw InvalidArgument("confusion counts must be non-negative");
}

void ConfusionMatrix::add(int truth, int predicted, std::int64_t count) {
  const int n = static_cast<int>(size());
  if (truth < 0 || truth >= n || predicted < 0 || predicted >= n) throw InvalidArgument("class id out of range");
  counts_[static_cast<std::size_t>(truth) * size() + static_cast<std::size_t>(predicted)] += count;
}

std::int64_t ConfusionMatrix::at(int truth, int predicted) const {
  return counts_.at(static_cast<std::size_t>(truth) * size() + static_cast<std::size_t>(predicted));
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (int i = 0; i < static_cast<int>(size()); ++i) t += at(i, i);
  return t;
}

MetricsReport compute_metrics(const ConfusionMatrix& m, const std::string& method) {
  MetricsReport r;
  r.method = method;
  const int n = static_cast<int>(m.size());
  r.samples = m.total();
  r.accuracy = r.samples > 0 ? static_cast<double>(m.trace()) / static_cast<double>(r.samples) : 0.0;
  for (int k = 0; k < n; ++k) {
    ClassMetrics c;
    c.word = m.vocab().word(k);
    std::int64_t predicted = 0;
    for (int i = 0; i < n; ++i) {
      c.support += m.at(k, i);
      predicted += m.at(i, k);
    }
    const auto tp = static_cast<double>(m.at(k, k));
    c.precision_degenerate = predicted == 0;
    c.recall_degenerate = c.support == 0;
    c.precision = c.precision_degenerate ? 0.0 : tp / static_cast<double>(predicted);
    c.recall = c.recall_degenerate ? 0.0 : tp / static_cast<double>(c.support);
    c.f1_degenerate = c.precision + c.recall == 0.0;
    c.f1 = c.f1_degenerate ? 0.0 : 2.0 * c.precision * c.recall / (c.precision + c.recall);
    r.macro_precision += c.precision;
    r.macro_recall += c.recall;
    r.macro_f1 += c.f1;
    r.per_class.push_back(std::move(c));
  }
  if (n > 0) {
    r.macro_precision /= n;
    r.macro_recall /= n;
    r.macro_f1 /= n;
  }
  return r;
}

Evaluation evaluate(const TrainedModel& model, const ClipManifest& manifest, const FeaturePipeline& pipeline,
                    Split split) {
  if (!(model.vocab() == manifest.vocab()))
    throw InvalidArgument("model vocabulary does not match the manifest vocabulary");
  const auto records = manifest.in_split(split);
  if (records.empty()) throw EmptySplit("manifest has no " + to_string(split) + " records");

  Evaluation ev;
  ev.matrix = ConfusionMatrix(model.vocab());
  std::vector<int> labels;
  const auto dist = predict_batch(model, encode_records(model, records, pipeline));
  const auto c = static_cast<std::size_t>(model.spec().num_classes);
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto p = make_prediction(std::span<const double>(dist.data() + i * c, c), model.vocab());
    const int truth = manifest.vocab().id(records[i].label);
    labels.push_back(truth);
    ev.matrix.add(truth, p.class_id);
    ev.predictions.push_back(std::move(p));
    ev.clip_ids.push_back(records[i].clip_id);
  }
  ev.report = compute_metrics(ev.matrix, to_string(model.spec().method));
  ev.report.split = to_string(split);
  ev.report.loss = score_distributions(dist, labels).loss;
  return ev;
}

std::vector<ComparisonRow> compare_methods(std::span<const MetricsReport> reports) {
  std::vector<ComparisonRow> rows;
  for (const auto& r : reports) {
    ComparisonRow row;
    row.method = r.method;
    row.val_acc = r.val_accuracy;
    row.train_acc = r.train_accuracy;
    row.val_loss = r.val_loss;
    row.train_loss = r.train_loss;
    row.test_acc = r.accuracy;
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    const bool ka = std::isfinite(a.val_acc), kb = std::isfinite(b.val_acc);
    if (ka != kb) return ka;
    return ka && a.val_acc > b.val_acc;
  });
  return rows;
}

std::string render_comparison(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  std::size_t w = 6;
  for (const auto& r : rows) w = std::max(w, r.method.size());
  os << pad("Method", w) << "  " << pad("Val-Acc", 8, true) << "  " << pad("Train-Acc", 9, true) << "  "
     << pad("Val-Loss", 8, true) << "  " << pad("Train-Loss", 10, true) << "  " << pad("Test-Acc", 8, true) << '\n';
  os << std::string(w + 2 + 8 + 2 + 9 + 2 + 8 + 2 + 10 + 2 + 8, '-') << '\n';
  for (const auto& r : rows)
    os << pad(r.method, w) << "  " << pad(cell(r.val_acc), 8, true) << "  " << pad(cell(r.train_acc), 9, true)
       << "  " << pad(cell(r.val_loss), 8, true) << "  " << pad(cell(r.train_loss), 10, true) << "  "
       << pad(cell(r.test_acc), 8, true) << '\n';
  return os.str();
}

std::string comparison_json(const std::vector<ComparisonRow>& rows) {
  ordered_json j = ordered_json::array();
  for (const auto& r : rows)
    j.push_back({{"method", r.method},
                 {"val_acc", number_or_null(r.val_acc)},
                 {"train_acc", number_or_null(r.train_acc)},
                 {"val_loss", number_or_null(r.val_loss)},
                 {"train_loss", number_or_null(r.train_loss)},
                 {"test_acc", number_or_null(r.test_acc)}});
  return j.dump(2);
}

std::string render_report(const Evaluation& ev) {
  const auto& r = ev.report;
  std::ostringstream os;
  os << "method " << r.method << ", split " << r.split << ", " << r.samples << " clips\n";
  os << "accuracy " << cell(r.accuracy) << "  loss " << cell(r.loss) << "  macro P/R/F1 " << cell(r.macro_precision)
     << " / " << cell(r.macro_recall) << " / " << cell(r.macro_f1) << "\n\n";
  std::size_t w = 5;
  for (const auto& c : r.per_class) w = std::max(w, c.word.size());
  os << pad("class", w) << "  " << pad("prec", 6, true) << "  " << pad("recall", 6, true) << "  "
     << pad("f1", 6, true) << "  " << pad("n", 5, true) << '\n';
  for (const auto& c : r.per_class) {
    os << pad(c.word, w) << "  " << pad(cell(c.precision, "%.3f"), 6, true) << "  "
       << pad(cell(c.recall, "%.3f"), 6, true) << "  " << pad(cell(c.f1, "%.3f"), 6, true) << "  "
       << pad(std::to_string(c.support), 5, true);
    if (c.precision_degenerate || c.recall_degenerate) os << "  (degenerate)";
    os << '\n';
  }
  os << "\nconfusion (rows true, cols predicted)\n";
  const int n = static_cast<int>(ev.matrix.size());
  os << pad("", w);
  for (int j = 0; j < n; ++j) os << ' ' << pad(std::to_string(j), 4, true);
  os << '\n';
  for (int i = 0; i < n; ++i) {
    os << pad(ev.matrix.vocab().word(i), w);
    for (int j = 0; j < n; ++j) os << ' ' << pad(std::to_string(ev.matrix.at(i, j)), 4, true);
    os << '\n';
  }
  return os.str();
}

std::string report_json(const Evaluation& ev) {
  const auto& r = ev.report;
  ordered_json j;
  j["method"] = r.method;
  j["split"] = r.split;
  j["samples"] = r.samples;
  j["accuracy"] = r.accuracy;
  j["loss"] = number_or_null(r.loss);
  j["macro_precision"] = r.macro_precision;
  j["macro_recall"] = r.macro_recall;
  j["macro_f1"] = r.macro_f1;
  j["train_accuracy"] = number_or_null(r.train_accuracy);
  j["train_loss"] = number_or_null(r.train_loss);
  j["val_accuracy"] = number_or_null(r.val_accuracy);
  j["val_loss"] = number_or_null(r.val_loss);
  j["per_class"] = ordered_json::array();
  for (const auto& c : r.per_class)
    j["per_class"].push_back({{"word", c.word},
                              {"support", c.support},
                              {"precision", c.precision},
                              {"recall", c.recall},
                              {"f1", c.f1},
                              {"precision_degenerate", c.precision_degenerate},
                              {"recall_degenerate", c.recall_degenerate}});
  j["vocab"] = ev.matrix.vocab().words();
  j["confusion"] = ordered_json::array();
  const int n = static_cast<int>(ev.matrix.size());
  for (int i = 0; i < n; ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < n; ++k) row.push_back(ev.matrix.at(i, k));
    j["confusion"].push_back(row);
  }
  j["predictions"] = ordered_json::array();
  for (std::size_t i = 0; i < ev.predictions.size(); ++i)
    j["predictions"].push_back({{"clip_id", ev.clip_ids[i]},
                                {"label", ev.predictions[i].label},
                                {"confidence", ev.predictions[i].confidence}});
  return j.dump(2);
}

MetricsReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report " + path);
  try {
    const auto j = ordered_json::parse(in);
    MetricsReport r;
    r.method = j.at("method").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.samples = j.at("samples").get<std::int64_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.loss = number_or_nan(j, "loss");
    r.macro_precision = j.at("macro_precision").get<double>();
    r.macro_recall = j.at("macro_recall").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.train_accuracy = number_or_nan(j, "train_accuracy");
    r.train_loss = number_or_nan(j, "train_loss");
    r.val_accuracy = number_or_nan(j, "val_accuracy");
    r.val_loss = number_or_nan(j, "val_loss");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed report " + path + ": " + e.what());
  }
}

}  // namespace lipread
