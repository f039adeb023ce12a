#include "lipread/realtime.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <json.hpp>

#include "lipread/errors.hpp"

namespace lipread {
namespace {

using Clock = std::chrono::steady_clock;

struct Frame {
  long index = 0;
  cv::Mat rgb;
  Clock::time_point captured;
};

double ms_since(Clock::time_point t) { return std::chrono::duration<double, std::milli>(Clock::now() - t).count(); }

}  // namespace

void WindowConfig::validate() const {
  if (window < 1) throw InvalidArgument("window must be at least 1 frame");
  if (stride < 1 || stride > window) throw InvalidArgument("stride must be in [1, window]");
  if (!(confidence_threshold >= 0 && confidence_threshold <= 1))
    throw InvalidArgument("confidence threshold must be in [0, 1]");
  if (!(cooldown >= 0)) throw InvalidArgument("cooldown must be non-negative");
}

CommandBindings::CommandBindings(std::vector<CommandBinding> bindings, const WordVocabulary& vocab)
    : bindings_(std::move(bindings)) {
  std::set<std::string> seen;
  for (const auto& b : bindings_) {
    if (!vocab.contains(b.word)) throw InvalidArgument("binding for unknown word '" + b.word + "'");
    if (!seen.insert(b.word).second) throw InvalidArgument("word '" + b.word + "' is bound twice");
    if (b.action.empty()) throw InvalidArgument("binding for '" + b.word + "' has no action");
  }
  for (const auto& w : vocab.words())
    if (!seen.count(w)) throw InvalidArgument("word '" + w + "' has no binding");
}

CommandBindings CommandBindings::defaults(const WordVocabulary& vocab) {
  static const std::map<std::string, std::pair<std::string, bool>> kMeanings = {
      {"salam", {"greet", false}}, {"bro", {"go", false}},       {"bia", {"come", false}},
      {"khodahafez", {"farewell", false}}, {"surena", {"attend", false}}, {"begir", {"take", true}},
      {"benevis", {"write", false}}};
  std::vector<CommandBinding> out;
  for (const auto& w : vocab.words()) {
    const auto it = kMeanings.find(w);
    out.push_back(it == kMeanings.end() ? CommandBinding{w, w, false}
                                        : CommandBinding{w, it->second.first, it->second.second});
  }
  return CommandBindings(std::move(out), vocab);
}

CommandBindings CommandBindings::load(const std::string& path, const WordVocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open bindings file " + path);
  std::vector<CommandBinding> out;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& b : j.at("bindings"))
      out.push_back({b.at("word").get<std::string>(), b.at("action").get<std::string>(),
                     b.value("requires_object", false)});
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed bindings file " + path + ": " + e.what());
  }
  return CommandBindings(std::move(out), vocab);
}

const CommandBinding& CommandBindings::at(const std::string& word) const {
  for (const auto& b : bindings_)
    if (b.word == word) return b;
  throw InvalidArgument("no binding for '" + word + "'");
}

std::string event_json(const DispatchEvent& e) {
  nlohmann::ordered_json j;
  j["type"] = "dispatch";
  j["timestamp"] = e.timestamp;
  j["frame"] = e.frame_index;
  j["word"] = e.word;
  j["confidence"] = e.confidence;
  j["action"] = e.action;
  j["object"] = e.object_label ? nlohmann::ordered_json(*e.object_label) : nlohmann::ordered_json(nullptr);
  j["status"] = to_string(e.status);
  j["drops"] = e.drops;
  j["latency_ms"] = e.latency_ms;
  return j.dump();
}

LiveResult run_live(FrameSource& source, const TrainedModel& model, const FeaturePipeline& pipeline,
                    const WindowConfig& cfg, const CommandBindings& bindings, RobotClient& robot,
                    const ObjectDetector* detector, const LiveOptions& opts) {
  cfg.validate();
  const QueuePolicy policy = opts.policy.value_or(source.live() ? QueuePolicy::drop_oldest : QueuePolicy::block);
  BoundedQueue<Frame> queue(std::max<std::size_t>(1, opts.queue_capacity), policy);

  std::ofstream log;
  if (!opts.event_log.empty()) {
    log.open(opts.event_log, std::ios::trunc);
    if (!log) throw IoError("cannot write event log " + opts.event_log);
  }

  LiveResult result;
  std::exception_ptr producer_error;
  const auto start = Clock::now();
  std::thread producer([&] {
    try {
      long index = 0;
      while (auto frame = source.next()) {
        if (!queue.push({index++, std::move(*frame), Clock::now()})) break;
      }
      result.stats.frames_captured = index;
    } catch (...) {
      producer_error = std::current_exception();
    }
    queue.close();
  });

  const double fps = source.fps() > 0 ? source.fps() : 20.0;
  std::deque<Frame> buffer;
  long since_eval = 0;
  bool evaluated = false;
  std::optional<double> last_dispatch;

  try {
    while (auto frame = queue.pop()) {
      ++result.stats.frames_processed;
      buffer.push_back(std::move(*frame));
      while (static_cast<int>(buffer.size()) > cfg.window) buffer.pop_front();
      result.stats.max_buffer = std::max(result.stats.max_buffer, buffer.size());
      ++since_eval;
      if (static_cast<int>(buffer.size()) < cfg.window || (evaluated && since_eval < cfg.stride)) continue;
      evaluated = true;
      since_eval = 0;

      const auto ready = Clock::now();
      const Frame& latest = buffer.back();
      std::vector<cv::Mat> window;
      window.reserve(buffer.size());
      for (const auto& f : buffer) window.push_back(f.rgb);

      WindowResult w;
      w.frame_index = latest.index;
      w.timestamp = static_cast<double>(latest.index) / fps;
      try {
        w.prediction = predict_clip(model, pipeline.from_frames(window, fps, "live"));
      } catch (const AllFramesInvalid&) {
        // no mouth in view: nothing to say about this window
        continue;
      } catch (const DegenerateGeometry&) {
        continue;
      }
      ++result.stats.windows;

      const bool confident = w.prediction.confidence >= cfg.confidence_threshold;
      const bool cooled = !last_dispatch || w.timestamp - *last_dispatch >= cfg.cooldown;
      if (confident && cooled) {
        const auto& binding = bindings.at(w.prediction.label);
        DispatchEvent e;
        e.timestamp = w.timestamp;
        e.frame_index = latest.index;
        e.word = w.prediction.label;
        e.class_id = w.prediction.class_id;
        e.confidence = w.prediction.confidence;
        e.action = binding.action;
        if (binding.requires_object && detector) e.object_label = detector->detect(latest.rgb);
        e.drops = queue.dropped();
        e.latency_ms = ms_since(ready);
        try {
          e.status = robot.dispatch(e.action, e.object_label);
        } catch (const RobotUnavailable&) {
          e.status = DispatchStatus::unavailable;
        }
        last_dispatch = w.timestamp;
        w.dispatched = true;
        if (log) log << event_json(e) << '\n' << std::flush;
        result.events.push_back(std::move(e));
      }
      w.latency_ms = ms_since(ready);
      if (opts.on_window) opts.on_window(w);
      result.windows.push_back(std::move(w));
    }
  } catch (...) {
    queue.close();
    producer.join();
    throw;
  }
  producer.join();
  if (producer_error) std::rethrow_exception(producer_error);

  result.stats.frames_dropped = queue.dropped();
  result.stats.max_queue = queue.max_size();
  result.stats.elapsed_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  result.stats.windows_per_second =
      result.stats.elapsed_seconds > 0 ? static_cast<double>(result.stats.windows) / result.stats.elapsed_seconds : 0;
  return result;
}

}  // namespace lipread
