#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include <json.hpp>

#include "lipread/errors.hpp"
#include "lipread/realtime.hpp"
#include "tempdir.hpp"

using namespace lipread;

namespace {

const WordVocabulary& vocab7() {
  static const auto v = WordVocabulary::default_wordset();
  return v;
}

constexpr int kUnsure = 255;

// Solid frames whose red channel carries a class code.
class CodedSource final : public FrameSource {
 public:
  CodedSource(std::vector<int> codes, bool live = false, int period_ms = 0)
      : codes_(std::move(codes)), live_(live), period_ms_(period_ms) {}
  std::optional<cv::Mat> next() override {
    if (i_ >= codes_.size()) return std::nullopt;
    if (period_ms_) std::this_thread::sleep_for(std::chrono::milliseconds(period_ms_));
    return cv::Mat(8, 8, CV_8UC3, cv::Scalar(codes_[i_++], 0, 0));
  }
  double fps() const override { return 20.0; }
  bool live() const override { return live_; }
  std::string describe() const override { return "coded"; }

 private:
  std::vector<int> codes_;
  bool live_;
  int period_ms_;
  std::size_t i_ = 0;
};

std::vector<int> schedule(std::initializer_list<std::pair<int, int>> runs) {
  std::vector<int> out;
  for (const auto& [code, n] : runs) out.insert(out.end(), static_cast<std::size_t>(n), code);
  return out;
}

// Majority code over the window, one-hot with logit `amplitude`.
class CodedPipeline final : public FeaturePipeline {
 public:
  explicit CodedPipeline(double amplitude = 10.0, int delay_ms = 0) : amplitude_(amplitude), delay_ms_(delay_ms) {}
  std::string name() const override { return "coded"; }
  Features from_record(const ClipRecord&) const override { throw InvalidArgument("frames only"); }
  Features from_frames(const std::vector<cv::Mat>& rgb, double, const std::string&) const override {
    if (delay_ms_) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
    std::map<int, int> votes;
    for (const auto& f : rgb) ++votes[f.at<cv::Vec3b>(0, 0)[0]];
    const int code = std::max_element(votes.begin(), votes.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
    LipTensor t;
    t.data.assign(static_cast<std::size_t>(t.frames) * kMouthPoints * 2, 0.0);
    if (code != kUnsure) t.data[static_cast<std::size_t>(code)] = amplitude_;
    return t;
  }

 private:
  double amplitude_;
  int delay_ms_;
};

// Logits are the first seven features.
TrainedModel readout_model() {
  std::mt19937_64 rng(0);
  auto net = std::make_unique<nn::Sequential>();
  net->emplace<nn::Flatten>();
  net->emplace<nn::Dense>(800, 7, rng);
  TrainedModel model(ModelSpec::defaults(Method::indirect_cnn, 7), vocab7(), std::move(net));
  auto p = model.parameters();
  p[0]->value.fill(0.0);
  p[1]->value.fill(0.0);
  for (int i = 0; i < 7; ++i) p[0]->value[static_cast<std::size_t>(i) * 7 + i] = 1.0;
  return model;
}

struct Fixture {
  TrainedModel model = readout_model();
  CommandBindings bindings = CommandBindings::defaults(vocab7());
  MockRobot robot;
};

// One-shot TCP peer answering every connection with `reply`.
class ReplyServer {
 public:
  explicit ReplyServer(std::string reply) : reply_(std::move(reply)) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    ::listen(fd_, 4);
    thread_ = std::thread([this] {
      while (true) {
        const int c = ::accept(fd_, nullptr, nullptr);
        if (c < 0 || stop_) {
          if (c >= 0) ::close(c);
          return;
        }
        std::string got;
        char buf[256];
        while (got.find('\n') == std::string::npos) {
          const auto n = ::recv(c, buf, sizeof buf, 0);
          if (n <= 0) break;
          got.append(buf, static_cast<std::size_t>(n));
        }
        {
          std::lock_guard lock(mu_);
          lines_.push_back(got);
        }
        ::send(c, reply_.data(), reply_.size(), MSG_NOSIGNAL);
        ::close(c);
      }
    });
  }
  ~ReplyServer() {
    stop_ = true;
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    thread_.join();
  }
  int port() const { return port_; }
  std::vector<std::string> lines() const {
    std::lock_guard lock(mu_);
    return lines_;
  }

 private:
  std::string reply_;
  int fd_ = -1, port_ = 0;
  std::atomic<bool> stop_{false};
  mutable std::mutex mu_;
  std::vector<std::string> lines_;
  std::thread thread_;
};

}  // namespace

TEST_SUITE("realtime") {

TEST_CASE("window config validation") {
  WindowConfig c;
  CHECK_NOTHROW(c.validate());
  c.stride = 21;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.stride = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.confidence_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.cooldown = -1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("command bindings") {
  const auto d = CommandBindings::defaults(vocab7());
  CHECK(d.at("bia").action == "come");
  CHECK(d.at("salam").action == "greet");
  CHECK(d.at("begir").requires_object);
  CHECK(d.all().size() == 7);
  CHECK_THROWS_AS(d.at("nope"), InvalidArgument);

  auto list = d.all();
  list.pop_back();
  CHECK_THROWS_AS(CommandBindings(list, vocab7()), InvalidArgument);
  list.push_back(list.front());
  CHECK_THROWS_AS(CommandBindings(list, vocab7()), InvalidArgument);
  list.back() = {"unknown", "x", false};
  CHECK_THROWS_AS(CommandBindings(list, vocab7()), InvalidArgument);

  oracle::TempDir tmp;
  nlohmann::json j;
  for (const auto& b : d.all()) j["bindings"].push_back({{"word", b.word}, {"action", b.action + "_x"}});
  std::ofstream(tmp / "b.json") << j.dump();
  CHECK(CommandBindings::load(tmp / "b.json", vocab7()).at("bro").action == "go_x");
  std::ofstream(tmp / "bad.json") << "{\"bindings\": 3}";
  CHECK_THROWS_AS(CommandBindings::load(tmp / "bad.json", vocab7()), InvalidArgument);
  CHECK_THROWS_AS(CommandBindings::load(tmp / "none.json", vocab7()), IoError);
}

TEST_CASE("bounded queue policies") {
  BoundedQueue<int> q(3, QueuePolicy::drop_oldest);
  for (int i = 1; i <= 5; ++i) CHECK(q.push(i));
  CHECK(q.dropped() == 2);
  CHECK(q.max_size() == 3);
  CHECK(*q.pop() == 3);
  CHECK(*q.pop() == 4);
  q.close();
  CHECK(*q.pop() == 5);
  CHECK_FALSE(q.pop().has_value());
  CHECK_FALSE(q.push(6));

  BoundedQueue<int> b(2, QueuePolicy::block);
  std::thread producer([&] {
    for (int i = 0; i < 50; ++i) b.push(i);
    b.close();
  });
  int expect = 0;
  while (auto v = b.pop()) CHECK(*v == expect++);
  producer.join();
  CHECK(expect == 50);
  CHECK(b.dropped() == 0);
  CHECK(b.max_size() <= 2);
}

TEST_CASE("one inference every stride frames") {
  Fixture f;
  CodedSource src(schedule({{2, 100}}));
  const auto r = run_live(src, f.model, CodedPipeline(), WindowConfig{}, f.bindings, f.robot);
  REQUIRE(r.windows.size() == 17);  // frames 19, 24, ..., 99
  for (std::size_t i = 0; i < r.windows.size(); ++i) {
    CHECK(r.windows[i].frame_index == 19 + 5 * static_cast<long>(i));
    if (i) CHECK(r.windows[i].timestamp - r.windows[i - 1].timestamp == doctest::Approx(0.25));
  }
  CHECK(r.stats.max_buffer == 20);
  CHECK(r.stats.frames_processed == 100);
  CHECK(r.stats.frames_dropped == 0);
}

TEST_CASE("confidence below threshold never dispatches") {
  Fixture f;
  CodedSource src(schedule({{1, 80}}));
  // exp(a) / (exp(a) + 6) = 0.5
  const auto r = run_live(src, f.model, CodedPipeline(std::log(6.0)), WindowConfig{}, f.bindings, f.robot);
  CHECK(r.windows.size() == 13);
  for (const auto& w : r.windows) CHECK(w.prediction.confidence == doctest::Approx(0.5));
  CHECK(r.events.empty());
  CHECK(f.robot.log().empty());
}

TEST_CASE("scripted words dispatch in order with cooldown") {
  Fixture f;
  CodedSource src(schedule({{kUnsure, 10}, {3, 40}, {kUnsure, 10}, {5, 40}, {kUnsure, 20}}));
  WindowConfig cfg;
  oracle::TempDir tmp;
  LiveOptions opts;
  opts.event_log = tmp / "events.jsonl";
  const auto r = run_live(src, f.model, CodedPipeline(), cfg, f.bindings, f.robot, nullptr, opts);
  std::vector<std::string> distinct;
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    const auto& e = r.events[i];
    CHECK(e.confidence >= cfg.confidence_threshold);
    if (i) CHECK(e.timestamp - r.events[i - 1].timestamp >= cfg.cooldown - 1e-9);
    if (distinct.empty() || distinct.back() != e.word) distinct.push_back(e.word);
  }
  CHECK(distinct == std::vector<std::string>{vocab7().word(3), vocab7().word(5)});
  CHECK(f.robot.log().size() == r.events.size());
  CHECK(f.robot.log().front().action == f.bindings.at(vocab7().word(3)).action);

  std::ifstream in(opts.event_log);
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line); ++lines) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("word") == r.events[lines].word);
    CHECK(j.contains("timestamp"));
    CHECK(j.contains("drops"));
    CHECK(j.contains("latency_ms"));
    CHECK(j.at("status") == to_string(DispatchStatus::ack));
  }
  CHECK(lines == r.events.size());
}

TEST_CASE("object-bound commands carry the detector label") {
  Fixture f;
  const int take = vocab7().id("begir"), come = vocab7().id("bia");
  CodedSource src(schedule({{take, 25}, {come, 40}}));
  StubObjectDetector cup("cup");
  WindowConfig cfg;
  cfg.cooldown = 0.5;
  const auto r = run_live(src, f.model, CodedPipeline(), cfg, f.bindings, f.robot, &cup);
  REQUIRE(r.events.size() >= 2);
  for (const auto& e : r.events) {
    if (e.word == "begir") CHECK(e.object_label == std::optional<std::string>("cup"));
    else CHECK_FALSE(e.object_label.has_value());
  }
}

TEST_CASE("unavailable robot is logged and the loop continues") {
  Fixture f;
  f.robot.set_failure(true);
  CodedSource src(schedule({{0, 100}}));
  WindowConfig cfg;
  cfg.cooldown = 0.0;
  const auto r = run_live(src, f.model, CodedPipeline(), cfg, f.bindings, f.robot);
  CHECK(r.events.size() == r.windows.size());
  for (const auto& e : r.events) CHECK(e.status == DispatchStatus::unavailable);
  CHECK(f.robot.log().empty());
  CHECK(r.stats.frames_processed == 100);
}

TEST_CASE("mock robot records actions") {
  MockRobot robot;
  CHECK(robot.dispatch("come", std::nullopt) == DispatchStatus::ack);
  CHECK(robot.dispatch("take", std::string("cup")) == DispatchStatus::ack);
  robot.set_failure(true);
  CHECK(robot.dispatch("go", std::nullopt) == DispatchStatus::unavailable);
  robot.set_failure(false);
  const auto log = robot.log();
  REQUIRE(log.size() == 2);
  CHECK(log[0].action == "come");
  CHECK(log[1].object == std::optional<std::string>("cup"));
  CHECK(log[1].time >= log[0].time);
}

TEST_CASE("live source under backpressure drops oldest frames") {
  Fixture f;
  // A frame every 1 ms against 5 ms per window: the consumer falls behind but
  // still sees enough frames to fill a window however the threads are scheduled.
  CodedSource src(schedule({{4, 400}}), /*live=*/true, /*period_ms=*/1);
  LiveOptions opts;
  opts.queue_capacity = 4;
  WindowConfig cfg;
  cfg.stride = 1;
  const auto r = run_live(src, f.model, CodedPipeline(10.0, 5), cfg, f.bindings, f.robot, nullptr, opts);
  CHECK(r.stats.frames_captured == 400);
  CHECK(r.stats.frames_dropped > 0);
  CHECK(r.stats.frames_processed + r.stats.frames_dropped == 400);
  CHECK(r.stats.max_queue <= 4);
  CHECK(r.stats.max_buffer <= 20);
  // The newest frame always survives, so the last window ends on it.
  REQUIRE_FALSE(r.windows.empty());
  CHECK(r.windows.back().frame_index == 399);
  long drops = 0;
  for (const auto& e : r.events) {
    CHECK(e.drops >= drops);
    drops = e.drops;
  }
}

TEST_CASE("replay blocks instead of dropping") {
  Fixture f;
  CodedSource src(schedule({{4, 120}}));
  LiveOptions opts;
  opts.queue_capacity = 2;
  const auto r = run_live(src, f.model, CodedPipeline(10.0, 2), WindowConfig{}, f.bindings, f.robot, nullptr, opts);
  CHECK(r.stats.frames_dropped == 0);
  CHECK(r.stats.frames_processed == 120);
}

TEST_CASE("stub model sustains 20 windows per second") {
  Fixture f;
  CodedSource src(schedule({{2, 600}}));
  WindowConfig cfg;
  cfg.stride = 1;
  const auto r = run_live(src, f.model, CodedPipeline(), cfg, f.bindings, f.robot);
  CHECK(r.stats.windows == 581);
  CHECK(r.stats.windows_per_second >= 20.0);
}

TEST_CASE("socket robot speaks one json line per command") {
  ReplyServer ok("ack\n");
  SocketRobot robot("127.0.0.1", ok.port());
  CHECK(robot.dispatch("take", std::string("cup")) == DispatchStatus::ack);
  CHECK(robot.dispatch("go", std::nullopt) == DispatchStatus::ack);
  const auto lines = ok.lines();
  REQUIRE(lines.size() == 2);
  const auto j = nlohmann::json::parse(lines[0]);
  CHECK(j.at("action") == "take");
  CHECK(j.at("object") == "cup");
  CHECK(nlohmann::json::parse(lines[1]).at("object").is_null());

  ReplyServer no("busy\n");
  CHECK(SocketRobot("127.0.0.1", no.port()).dispatch("go", std::nullopt) == DispatchStatus::unavailable);
  const int dead = [] {
    ReplyServer tmp("ack\n");
    return tmp.port();
  }();
  CHECK(SocketRobot("127.0.0.1", dead, 200).dispatch("go", std::nullopt) == DispatchStatus::unavailable);
}

TEST_CASE("robot and source specs") {
  CHECK(dynamic_cast<MockRobot*>(make_robot("mock").get()));
  CHECK(dynamic_cast<SocketRobot*>(make_robot("tcp:localhost:9000").get()));
  CHECK_THROWS_AS(make_robot("tcp:localhost"), InvalidArgument);
  CHECK_THROWS_AS(make_robot("tcp:localhost:x"), InvalidArgument);
  CHECK_THROWS_AS(make_robot("serial"), InvalidArgument);

  const auto s = parse_synth_script("3:2,rest:0.5,bro:1", &vocab7());
  REQUIRE(s.size() == 3);
  CHECK(s[0].class_id == 3);
  CHECK(s[1].class_id == -1);
  CHECK(s[2].class_id == vocab7().id("bro"));
  CHECK_THROWS_AS(parse_synth_script("bro:1"), InvalidArgument);
  CHECK_THROWS_AS(parse_synth_script("3:0"), InvalidArgument);
  CHECK_THROWS_AS(parse_synth_script("3"), InvalidArgument);
  CHECK_THROWS_AS(make_source("usb:0"), InvalidArgument);

  SynthScriptSource src(parse_synth_script("3:2,5:2"), 1);
  CHECK(src.total_frames() == 80);
  CHECK(src.segment_at(0) == 0);
  CHECK(src.segment_at(39) == 0);
  CHECK(src.segment_at(40) == 1);
  CHECK(src.segment_at(80) == -1);
  int n = 0;
  while (auto frame = src.next()) {
    CHECK(frame->size() == cv::Size(300, 300));
    ++n;
  }
  CHECK(n == 80);
}

TEST_CASE("event json fields") {
  DispatchEvent e;
  e.word = "bia";
  e.action = "come";
  e.confidence = 0.9;
  e.drops = 3;
  e.status = DispatchStatus::unavailable;
  const auto j = nlohmann::json::parse(event_json(e));
  CHECK(j.at("object").is_null());
  CHECK(j.at("status") == "unavailable");
  CHECK(j.at("drops") == 3);
}

}  // TEST_SUITE
