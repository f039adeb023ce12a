#include "lipread/robot.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include <json.hpp>

#include "lipread/errors.hpp"

namespace lipread {
namespace {

class Socket {
 public:
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int fd() const { return fd_; }

 private:
  int fd_;
};

bool wait_for(int fd, short events, int timeout_ms) {
  pollfd p{fd, events, 0};
  return ::poll(&p, 1, timeout_ms) == 1 && (p.revents & events);
}

}  // namespace

std::string to_string(DispatchStatus status) { return status == DispatchStatus::ack ? "dispatched" : "unavailable"; }

DispatchStatus MockRobot::dispatch(const std::string& action, const std::optional<std::string>& object) {
  std::lock_guard lock(mu_);
  if (fail_) return DispatchStatus::unavailable;
  log_.push_back({action, object, std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()});
  return DispatchStatus::ack;
}

void MockRobot::set_failure(bool fail) {
  std::lock_guard lock(mu_);
  fail_ = fail;
}

std::vector<MockRobot::Received> MockRobot::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

DispatchStatus SocketRobot::dispatch(const std::string& action, const std::optional<std::string>& object) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (::getaddrinfo(host_.c_str(), std::to_string(port_).c_str(), &hints, &found) != 0 || !found)
    return DispatchStatus::unavailable;
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> addrs(found, ::freeaddrinfo);

  for (const addrinfo* a = addrs.get(); a; a = a->ai_next) {
    Socket s(::socket(a->ai_family, a->ai_socktype | SOCK_NONBLOCK, a->ai_protocol));
    if (s.fd() < 0) continue;
    if (::connect(s.fd(), a->ai_addr, a->ai_addrlen) != 0) {
      if (errno != EINPROGRESS || !wait_for(s.fd(), POLLOUT, timeout_ms_)) continue;
      int err = 0;
      socklen_t len = sizeof err;
      if (::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len) != 0 || err != 0) continue;
    }
    nlohmann::json msg{{"action", action}};
    msg["object"] = object ? nlohmann::json(*object) : nlohmann::json(nullptr);
    const std::string line = msg.dump() + "\n";
    if (::send(s.fd(), line.data(), line.size(), MSG_NOSIGNAL) != static_cast<ssize_t>(line.size()))
      return DispatchStatus::unavailable;
    std::string reply;
    char buf[64];
    while (reply.find('\n') == std::string::npos && reply.size() < 256) {
      if (!wait_for(s.fd(), POLLIN, timeout_ms_)) break;
      const ssize_t n = ::recv(s.fd(), buf, sizeof buf, 0);
      if (n <= 0) break;
      reply.append(buf, static_cast<std::size_t>(n));
    }
    return reply.rfind("ack", 0) == 0 ? DispatchStatus::ack : DispatchStatus::unavailable;
  }
  return DispatchStatus::unavailable;
}

std::unique_ptr<RobotClient> make_robot(const std::string& spec) {
  if (spec == "mock") return std::make_unique<MockRobot>();
  if (spec.rfind("tcp:", 0) == 0) {
    const auto rest = spec.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw InvalidArgument("robot spec must be tcp:HOST:PORT");
    try {
      return std::make_unique<SocketRobot>(rest.substr(0, colon), std::stoi(rest.substr(colon + 1)));
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad robot port in '" + spec + "'");
    }
  }
  throw InvalidArgument("unknown robot '" + spec + "' (mock, tcp:HOST:PORT)");
}

}  // namespace lipread
