#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lipread/models.hpp"
#include "lipread/pipeline.hpp"
#include "lipread/robot.hpp"
#include "lipread/sources.hpp"

namespace lipread {

struct WindowConfig {
  int window = 20;
  int stride = 5;
  double confidence_threshold = 0.7;
  double cooldown = 1.0;  // seconds of stream time after a dispatch

  /// Throws InvalidArgument.
  void validate() const;
};

struct CommandBinding {
  std::string word;
  std::string action;
  bool requires_object = false;
};

/// Word to robot-action table; every vocabulary word is bound exactly once.
class CommandBindings {
 public:
  CommandBindings() = default;
  CommandBindings(std::vector<CommandBinding> bindings, const WordVocabulary& vocab);

  /// The wordset's default meanings (salam -> greet, ...). Words outside the
  /// default wordset are bound to an action of the same name.
  static CommandBindings defaults(const WordVocabulary& vocab);
  /// JSON: {"bindings": [{"word", "action", "requires_object"}...]}.
  static CommandBindings load(const std::string& path, const WordVocabulary& vocab);

  const CommandBinding& at(const std::string& word) const;
  const std::vector<CommandBinding>& all() const noexcept { return bindings_; }

 private:
  std::vector<CommandBinding> bindings_;
};

struct DispatchEvent {
  double timestamp = 0;     // stream time of the window's last frame, seconds
  long frame_index = 0;
  std::string word;
  int class_id = 0;
  double confidence = 0;
  std::string action;
  std::optional<std::string> object_label;
  DispatchStatus status = DispatchStatus::ack;
  long drops = 0;           // frames dropped by the capture queue so far
  double latency_ms = 0;    // window complete -> dispatch decision
};

struct WindowResult {
  double timestamp = 0;
  long frame_index = 0;
  Prediction prediction;
  double latency_ms = 0;
  bool dispatched = false;
};

enum class QueuePolicy { drop_oldest, block };

/// Bounded FIFO between capture and inference.
template <typename T>
class BoundedQueue {
 public:
  BoundedQueue(std::size_t capacity, QueuePolicy policy) : capacity_(capacity), policy_(policy) {}

  /// Returns false once closed.
  bool push(T item) {
    std::unique_lock lock(mu_);
    if (policy_ == QueuePolicy::block) not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    if (items_.size() >= capacity_) {
      items_.pop_front();
      ++dropped_;
    }
    items_.push_back(std::move(item));
    max_size_ = std::max(max_size_, items_.size());
    not_empty_.notify_one();
    return true;
  }

  /// Waits for an item; nothing once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  long dropped() const {
    std::lock_guard lock(mu_);
    return dropped_;
  }
  std::size_t max_size() const {
    std::lock_guard lock(mu_);
    return max_size_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
  std::deque<T> items_;
  std::size_t capacity_;
  QueuePolicy policy_;
  bool closed_ = false;
  long dropped_ = 0;
  std::size_t max_size_ = 0;
};

struct LiveOptions {
  /// Defaults to drop_oldest for live sources and block for replays.
  std::optional<QueuePolicy> policy;
  std::size_t queue_capacity = 8;
  std::string event_log;  // JSON lines; empty disables
  std::function<void(const WindowResult&)> on_window;
};

struct LiveStats {
  long frames_captured = 0;
  long frames_processed = 0;
  long frames_dropped = 0;
  long windows = 0;
  std::size_t max_buffer = 0;
  std::size_t max_queue = 0;
  double elapsed_seconds = 0;
  double windows_per_second = 0;
};

struct LiveResult {
  std::vector<DispatchEvent> events;
  std::vector<WindowResult> windows;
  LiveStats stats;
};

/// Sliding-window recognition over `source`: capture runs on its own thread,
/// every `stride` frames the latest `window` frames are classified, and
/// confident predictions outside the cooldown are dispatched to `robot`.
/// Returns when the source closes.
LiveResult run_live(FrameSource& source, const TrainedModel& model, const FeaturePipeline& pipeline,
                    const WindowConfig& cfg, const CommandBindings& bindings, RobotClient& robot,
                    const ObjectDetector* detector = nullptr, const LiveOptions& opts = {});

std::string event_json(const DispatchEvent& event);

}  // namespace lipread
