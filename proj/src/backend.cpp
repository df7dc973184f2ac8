#include "triage/backend.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <mutex>
#include <sstream>
#include <thread>

#include "triage/error.hpp"

extern char** environ;

namespace triage {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Newline-framed byte stream to a backend.
class LineChannel {
 public:
  LineChannel(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}
  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;

  virtual ~LineChannel() { close_fds(); }

  void write_line(const std::string& line) {
    std::string buf = line;
    buf.push_back('\n');
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = send_bytes(buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw BackendError(std::string("write to backend failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  /// Next line without its terminator. Throws BackendError on timeout, EOF
  /// or I/O failure.
  std::string read_line(std::chrono::milliseconds timeout) {
    const auto deadline = Clock::now() + timeout;
    while (true) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (left.count() <= 0) {
        throw BackendError("timed out after " + std::to_string(timeout.count()) + " ms waiting for backend");
      }
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw BackendError(std::string("poll failed: ") + std::strerror(errno));
      }
      if (ready == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw BackendError(std::string("read from backend failed: ") + std::strerror(errno));
      }
      if (n == 0) throw BackendError("backend closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  virtual ssize_t send_bytes(const char* data, std::size_t size) { return ::write(write_fd_, data, size); }

  void close_fds() {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    read_fd_ = write_fd_ = -1;
  }

  int read_fd_;
  int write_fd_;

 private:
  std::string buffer_;
};

namespace {

class ProcessChannel final : public LineChannel {
 public:
  ProcessChannel(pid_t pid, int read_fd, int write_fd) : LineChannel(read_fd, write_fd), pid_(pid) {}

  ~ProcessChannel() override {
    // Closing stdin asks the backend to exit; give it a moment, then kill.
    close_fds();
    for (int i = 0; i < 50; ++i) {
      int status = 0;
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || r < 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }

 private:
  pid_t pid_;
};

class SocketChannel final : public LineChannel {
 public:
  explicit SocketChannel(int fd) : LineChannel(fd, fd) {}

 protected:
  ssize_t send_bytes(const char* data, std::size_t size) override {
    return ::send(write_fd_, data, size, MSG_NOSIGNAL);
  }
};

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::unique_ptr<LineChannel> spawn_process(const std::vector<std::string>& argv) {
  if (argv.empty()) throw BackendError("empty backend command");
  ignore_sigpipe();
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw BackendError("pipe failed");
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw BackendError("pipe failed");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  const int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    throw BackendError("cannot start backend '" + argv[0] + "': " + std::strerror(rc));
  }
  return std::make_unique<ProcessChannel>(pid, from_child[0], to_child[1]);
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw BackendError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw BackendError("cannot connect to " + host + ":" + service);
  return std::make_unique<SocketChannel>(fd);
}

json parse_frame(const std::string& line) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw ProtocolError("backend frame is not a JSON object", line);
    return j;
  } catch (const json::exception&) {
    throw ProtocolError("backend sent malformed JSON", line);
  }
}

}  // namespace

BackendEndpoint BackendEndpoint::parse(std::string_view descriptor) {
  BackendEndpoint ep;
  if (descriptor.starts_with("stdio:")) {
    ep.kind = Kind::process;
    std::istringstream ss{std::string(descriptor.substr(6))};
    std::string arg;
    while (ss >> arg) ep.argv.push_back(arg);
    if (ep.argv.empty()) throw std::invalid_argument("backend descriptor 'stdio:' needs a command");
    return ep;
  }
  if (descriptor.starts_with("tcp:")) {
    ep.kind = Kind::tcp;
    const auto rest = descriptor.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
      throw std::invalid_argument("backend descriptor must be tcp:<host>:<port>");
    }
    ep.host = std::string(rest.substr(0, colon));
    const std::string port(rest.substr(colon + 1));
    int value = 0;
    try {
      std::size_t used = 0;
      value = std::stoi(port, &used);
      if (used != port.size()) throw std::invalid_argument(port);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad port '" + port + "' in backend descriptor");
    }
    if (value <= 0 || value > 65535) throw std::invalid_argument("port out of range in backend descriptor");
    ep.port = static_cast<std::uint16_t>(value);
    return ep;
  }
  throw std::invalid_argument("backend descriptor must start with 'stdio:' or 'tcp:'");
}

std::string BackendEndpoint::describe() const {
  if (kind == Kind::tcp) return "tcp:" + host + ":" + std::to_string(port);
  std::string out = "stdio:";
  for (std::size_t i = 0; i < argv.size(); ++i) out += (i ? " " : "") + argv[i];
  return out;
}

BackendClient::BackendClient(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), timeout_(timeout) {}

BackendClient::BackendClient(BackendClient&&) noexcept = default;
BackendClient& BackendClient::operator=(BackendClient&&) noexcept = default;
BackendClient::~BackendClient() = default;

BackendClient BackendClient::connect(const BackendEndpoint& endpoint, std::chrono::milliseconds timeout) {
  auto channel = endpoint.kind == BackendEndpoint::Kind::process ? spawn_process(endpoint.argv)
                                                                 : connect_tcp(endpoint.host, endpoint.port);
  BackendClient client(std::move(channel), timeout);
  client.channel_->write_line(R"({"kind":"hello"})");
  const std::string line = client.channel_->read_line(timeout);
  const json frame = parse_frame(line);
  if (frame.value("kind", std::string()) != "ready") {
    throw ProtocolError("expected a 'ready' frame in reply to hello", line);
  }
  const auto tasks = frame.find("tasks");
  if (tasks == frame.end() || !tasks->is_array()) throw ProtocolError("'ready' frame lacks a tasks array", line);
  for (const auto& t : *tasks) {
    if (!t.is_string()) throw ProtocolError("task names must be strings", line);
    try {
      client.tasks_.push_back(parse_task(t.get<std::string>()));
    } catch (const std::invalid_argument&) {
      throw ProtocolError("backend announced unknown task '" + t.get<std::string>() + "'", line);
    }
  }
  return client;
}

bool BackendClient::supports(Task task) const {
  return std::find(tasks_.begin(), tasks_.end(), task) != tasks_.end();
}

std::vector<TaskPrediction> decode_result(const json& frame, std::int64_t expected_id, Task task,
                                          std::size_t n_texts, const std::string& raw_line) {
  if (frame.value("kind", std::string()) != "result") {
    throw ProtocolError("expected a 'result' frame", raw_line);
  }
  const auto id = frame.find("id");
  if (id == frame.end() || !id->is_number_integer()) throw ProtocolError("result frame lacks an integer id", raw_line);
  if (id->get<std::int64_t>() != expected_id) {
    throw ProtocolError("response id " + std::to_string(id->get<std::int64_t>()) + " does not match request id " +
                            std::to_string(expected_id),
                        raw_line);
  }
  const auto labels = frame.find("labels");
  const auto scores = frame.find("scores");
  if (labels == frame.end() || !labels->is_array() || labels->size() != n_texts) {
    throw ProtocolError("'labels' must be an array with one entry per text", raw_line);
  }
  if (scores == frame.end() || !scores->is_array() || scores->size() != n_texts) {
    throw ProtocolError("'scores' must be an array with one entry per text", raw_line);
  }
  const auto& schema = task_labels(task);
  std::vector<TaskPrediction> out(n_texts);
  for (std::size_t i = 0; i < n_texts; ++i) {
    const auto& ls = (*labels)[i];
    if (!ls.is_array()) throw ProtocolError("labels entry " + std::to_string(i) + " is not an array", raw_line);
    for (const auto& name : ls) {
      if (!name.is_string()) throw ProtocolError("label names must be strings", raw_line);
      const auto it = std::find(schema.begin(), schema.end(), name.get<std::string>());
      if (it == schema.end()) {
        throw ProtocolError("label '" + name.get<std::string>() + "' is not in the " +
                                std::string(task_name(task)) + " schema",
                            raw_line);
      }
      out[i].labels.set(static_cast<std::size_t>(it - schema.begin()));
    }
    const auto& ss = (*scores)[i];
    if (!ss.is_array() || ss.size() != schema.size()) {
      throw ProtocolError("scores entry " + std::to_string(i) + " must hold one number per schema label", raw_line);
    }
    for (const auto& s : ss) {
      if (!s.is_number()) throw ProtocolError("scores must be numbers", raw_line);
      const double v = s.get<double>();
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw ProtocolError("score outside [0, 1]", raw_line);
      out[i].scores.push_back(v);
    }
  }
  return out;
}

std::vector<TaskPrediction> BackendClient::predict(Task task, std::span<const std::string> texts) {
  if (texts.empty()) return {};
  if (!supports(task)) {
    throw BackendError("backend does not serve task '" + std::string(task_name(task)) + "'");
  }
  const std::int64_t id = next_id_++;
  json request = {{"kind", "predict"},
                  {"id", id},
                  {"task", task_name(task)},
                  {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  channel_->write_line(request.dump(-1, ' ', false, json::error_handler_t::replace));
  const std::string line = channel_->read_line(timeout_);
  const json frame = parse_frame(line);
  if (frame.value("kind", std::string()) == "error") {
    const auto eid = frame.find("id");
    if (eid != frame.end() && eid->is_number_integer() && eid->get<std::int64_t>() != id) {
      throw ProtocolError("error frame id does not match request id " + std::to_string(id), line);
    }
    throw BackendError("backend reported an error: " + frame.value("message", std::string("(no message)")));
  }
  return decode_result(frame, id, task, texts.size(), line);
}

std::vector<TaskPrediction> external_predict(BackendClient& client, Task task, std::span<const std::string> texts) {
  return client.predict(task, texts);
}

BackendClassifier::BackendClassifier(std::shared_ptr<BackendClient> client, Task task, std::size_t batch_size)
    : client_(std::move(client)), task_(task), batch_size_(std::max<std::size_t>(1, batch_size)) {
  if (!client_) throw std::invalid_argument("null backend client");
}

std::vector<TaskPrediction> BackendClassifier::predict(std::span<const std::string> texts) {
  std::vector<TaskPrediction> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    const auto batch = texts.subspan(start, std::min(batch_size_, texts.size() - start));
    auto part = client_->predict(task_, batch);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace triage
