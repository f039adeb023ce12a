#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace lipread {

enum class DispatchStatus { ack, unavailable };
std::string to_string(DispatchStatus status);

/// Command channel to the robot. Implementations must not throw for an
/// unreachable robot; they report `unavailable` instead.
class RobotClient {
 public:
  virtual ~RobotClient() = default;
  virtual DispatchStatus dispatch(const std::string& action, const std::optional<std::string>& object) = 0;
};

/// Records every action it receives. Thread-safe.
class MockRobot final : public RobotClient {
 public:
  struct Received {
    std::string action;
    std::optional<std::string> object;
    double time = 0;  // seconds since construction
  };

  DispatchStatus dispatch(const std::string& action, const std::optional<std::string>& object) override;
  /// While set, every dispatch is refused with `unavailable` and not recorded.
  void set_failure(bool fail);
  std::vector<Received> log() const;

 private:
  mutable std::mutex mu_;
  bool fail_ = false;
  std::vector<Received> log_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Sends one JSON line per command over TCP and expects a reply line
/// starting with "ack". A fresh connection is used per command.
class SocketRobot final : public RobotClient {
 public:
  SocketRobot(std::string host, int port, int timeout_ms = 500)
      : host_(std::move(host)), port_(port), timeout_ms_(timeout_ms) {}
  DispatchStatus dispatch(const std::string& action, const std::optional<std::string>& object) override;

 private:
  std::string host_;
  int port_;
  int timeout_ms_;
};

/// "mock" or "tcp:HOST:PORT".
std::unique_ptr<RobotClient> make_robot(const std::string& spec);

/// Pluggable object detector queried for commands that need an object.
class ObjectDetector {
 public:
  virtual ~ObjectDetector() = default;
  virtual std::optional<std::string> detect(const cv::Mat& rgb) const = 0;
};

/// Returns a configured label (or nothing) for every frame.
class StubObjectDetector final : public ObjectDetector {
 public:
  explicit StubObjectDetector(std::optional<std::string> label) : label_(std::move(label)) {}
  std::optional<std::string> detect(const cv::Mat&) const override { return label_; }

 private:
  std::optional<std::string> label_;
};

}  // namespace lipread
