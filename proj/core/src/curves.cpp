#include "lipread/curves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "lipread/errors.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace lipread {
namespace {

constexpr const char* kHeader = "epoch,train_loss,train_acc,val_loss,val_acc,wall_time";

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, std::abs(v) >= 10 ? "%.0f" : "%.2f", v);
  return buf;
}

struct Series {
  std::string name;
  std::vector<double> values;
  cv::Scalar color;
};

void plot(const std::vector<Series>& series, const std::string& title, const std::string& path) {
  const int w = 640, h = 420, left = 64, right = 20, top = 40, bottom = 50;
  cv::Mat img(h, w, CV_8UC3, cv::Scalar(255, 255, 255));
  const int n = static_cast<int>(series.front().values.size());

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series)
    for (double v : s.values) lo = std::min(lo, v), hi = std::max(hi, v);
  if (hi - lo < 1e-9) lo -= 0.5, hi += 0.5;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const auto px = [&](int i) {
    return n == 1 ? left + (w - left - right) / 2
                  : left + static_cast<int>(std::lround(static_cast<double>(i) * (w - left - right) / (n - 1)));
  };
  const auto py = [&](double v) { return top + static_cast<int>(std::lround((hi - v) / (hi - lo) * (h - top - bottom))); };

  const cv::Scalar axis(60, 60, 60), grid(225, 225, 225);
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    cv::line(img, {left, py(v)}, {w - right, py(v)}, grid, 1);
    cv::putText(img, tick_label(v), {6, py(v) + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.4, axis, 1, cv::LINE_AA);
  }
  const int step = std::max(1, n / 10);
  for (int i = 0; i < n; i += step)
    cv::putText(img, std::to_string(i + 1), {px(i) - 4, h - bottom + 16}, cv::FONT_HERSHEY_SIMPLEX, 0.4, axis, 1,
                cv::LINE_AA);
  cv::rectangle(img, {left, top}, {w - right, h - bottom}, axis, 1);
  cv::putText(img, title, {left, 26}, cv::FONT_HERSHEY_SIMPLEX, 0.6, axis, 1, cv::LINE_AA);
  cv::putText(img, "epoch", {w / 2 - 20, h - 12}, cv::FONT_HERSHEY_SIMPLEX, 0.45, axis, 1, cv::LINE_AA);

  int legend_y = top + 18;
  for (const auto& s : series) {
    std::vector<cv::Point> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(px(i), py(s.values[static_cast<std::size_t>(i)]));
    if (pts.size() > 1) cv::polylines(img, pts, false, s.color, 2, cv::LINE_AA);
    for (const auto& p : pts) cv::circle(img, p, 3, s.color, cv::FILLED, cv::LINE_AA);
    cv::line(img, {w - right - 110, legend_y - 4}, {w - right - 86, legend_y - 4}, s.color, 2);
    cv::putText(img, s.name, {w - right - 80, legend_y}, cv::FONT_HERSHEY_SIMPLEX, 0.45, axis, 1, cv::LINE_AA);
    legend_y += 18;
  }
  if (!cv::imwrite(path, img)) throw IoError("cannot write " + path);
}

ordered_json record_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},       {"train_loss", r.train_loss}, {"train_acc", r.train_acc},
          {"val_loss", r.val_loss}, {"val_acc", r.val_acc},       {"wall_time", r.wall_time}};
}

EpochRecord record_from_json(const ordered_json& j) {
  return {j.at("epoch").get<int>(),     j.at("train_loss").get<double>(), j.at("train_acc").get<double>(),
          j.at("val_loss").get<double>(), j.at("val_acc").get<double>(),   j.at("wall_time").get<double>()};
}

}  // namespace

CurveFiles emit_curves(const TrainingLog& log, const std::string& out_dir) {
  if (log.epochs.empty()) throw InvalidArgument("cannot plot an empty training log");
  fs::create_directories(out_dir);
  CurveFiles files{(fs::path(out_dir) / "training_log.csv").string(), (fs::path(out_dir) / "accuracy.png").string(),
                   (fs::path(out_dir) / "loss.png").string()};

  std::ofstream out(files.table, std::ios::trunc);
  out << kHeader << '\n';
  for (const auto& r : log.epochs)
    out << r.epoch << ',' << exact(r.train_loss) << ',' << exact(r.train_acc) << ',' << exact(r.val_loss) << ','
        << exact(r.val_acc) << ',' << exact(r.wall_time) << '\n';
  if (!out) throw IoError("cannot write " + files.table);

  std::vector<double> ta, va, tl, vl;
  for (const auto& r : log.epochs) {
    ta.push_back(r.train_acc);
    va.push_back(r.val_acc);
    tl.push_back(r.train_loss);
    vl.push_back(r.val_loss);
  }
  const cv::Scalar blue(200, 110, 30), orange(30, 130, 240);  // BGR for imwrite
  const std::string val = log.monitor_split;
  plot({{"train", ta, blue}, {val, va, orange}}, "accuracy", files.accuracy);
  plot({{"train", tl, blue}, {val, vl, orange}}, "loss", files.loss);
  return files;
}

std::vector<EpochRecord> read_training_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw IoError(path + " is not a training table");
  std::vector<EpochRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) throw IoError("malformed row in " + path + ": " + line);
    try {
      rows.push_back({std::stoi(cells[0]), std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]),
                      std::stod(cells[4]), std::stod(cells[5])});
    } catch (const std::logic_error&) {
      throw IoError("malformed row in " + path + ": " + line);
    }
  }
  return rows;
}

void write_training_summary(const TrainingLog& log, const std::string& path) {
  ordered_json j;
  j["method"] = log.method;
  j["stop_reason"] = to_string(log.stop_reason);
  j["epochs_run"] = log.epochs.size();
  j["best_epoch"] = log.best_epoch;
  j["monitor_split"] = log.monitor_split;
  if (!log.epochs.empty()) {
    j["last"] = record_json(log.epochs.back());
    if (log.best_epoch >= 1 && log.best_epoch <= static_cast<int>(log.epochs.size()))
      j["best"] = record_json(log.epochs[static_cast<std::size_t>(log.best_epoch - 1)]);
  }
  j["epochs"] = ordered_json::array();
  for (const auto& r : log.epochs) j["epochs"].push_back(record_json(r));
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path);
}

TrainingLog read_training_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    const auto j = ordered_json::parse(in);
    TrainingLog log;
    log.method = j.at("method").get<std::string>();
    log.stop_reason = parse_stop_reason(j.at("stop_reason").get<std::string>());
    log.best_epoch = j.at("best_epoch").get<int>();
    log.monitor_split = j.at("monitor_split").get<std::string>();
    for (const auto& r : j.at("epochs")) log.epochs.push_back(record_from_json(r));
    return log;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed training summary " + path + ": " + e.what());
  }
}

}  // namespace lipread
