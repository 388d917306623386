// Copyright 2026 The eatnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eatnas/external_evaluator.hpp"

#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "eatnas/protocol.hpp"

namespace eatnas {

Endpoint Endpoint::parse(const std::string& text) {
  Endpoint e;
  if (text.rfind("stdio:", 0) == 0) {
    e.kind = Kind::Stdio;
    e.command = text.substr(6);
    if (e.command.empty()) throw std::invalid_argument("endpoint: empty stdio command");
    return e;
  }
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw std::invalid_argument(fmt::format("endpoint \"{}\": expected stdio:CMD or HOST:PORT", text));
  }
  e.kind = Kind::Tcp;
  e.host = text.substr(0, colon);
  try {
    std::size_t used = 0;
    e.port = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw std::invalid_argument(fmt::format("endpoint \"{}\": bad port", text));
  }
  if (e.port < 1 || e.port > 65535) throw std::invalid_argument(fmt::format("endpoint \"{}\": bad port", text));
  return e;
}

std::string Endpoint::to_string() const {
  return kind == Kind::Stdio ? "stdio:" + command : fmt::format("{}:{}", host, port);
}

namespace {

class FdLineStream {
 public:
  FdLineStream(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}

  void write_line(const std::string& line, bool socket) {
    std::string data = line;
    data.push_back('\n');
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = socket ? ::send(write_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL)
                               : ::write(write_fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(fmt::format("write failed: {}", std::strerror(errno)));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(std::chrono::steady_clock::time_point deadline) {
    for (;;) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto remaining =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0) throw TimeoutError("timeout");
      pollfd pfd{read_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count(), 1'000'000)));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw TransportError(fmt::format("poll failed: {}", std::strerror(errno)));
      }
      if (rc == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(fmt::format("read failed: {}", std::strerror(errno)));
      }
      if (n == 0) throw TransportError("worker closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int read_fd_;
  int write_fd_;
  std::string buffer_;
};

class StdioConnection final : public WorkerConnection {
 public:
  explicit StdioConnection(const std::string& command) {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw TransportError("pipe failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw TransportError("pipe failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) throw TransportError(fmt::format("fork failed: {}", std::strerror(errno)));
    if (pid_ == 0) {
      ::setpgid(0, 0);
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::setpgid(pid_, pid_);
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    stream_ = std::make_unique<FdLineStream>(read_fd_, write_fd_);
  }

  ~StdioConnection() override {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (pid_ > 0) {
      ::kill(-pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }

  void write_line(const std::string& line) override { stream_->write_line(line, false); }
  std::string read_line(std::chrono::steady_clock::time_point deadline) override {
    return stream_->read_line(deadline);
  }

 private:
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::unique_ptr<FdLineStream> stream_;
};

class TcpConnection final : public WorkerConnection {
 public:
  TcpConnection(const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
      throw TransportError(fmt::format("resolve {}:{}: {}", host, port, ::gai_strerror(rc)));
    }
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
      fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd_ < 0) continue;
      if (::connect(fd_, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(fd_);
      fd_ = -1;
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) throw TransportError(fmt::format("connect {}:{} failed", host, port));
    stream_ = std::make_unique<FdLineStream>(fd_, fd_);
  }

  ~TcpConnection() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void write_line(const std::string& line) override { stream_->write_line(line, true); }
  std::string read_line(std::chrono::steady_clock::time_point deadline) override {
    return stream_->read_line(deadline);
  }

 private:
  int fd_ = -1;
  std::unique_ptr<FdLineStream> stream_;
};

}  // namespace

std::unique_ptr<WorkerConnection> WorkerConnection::open(const Endpoint& endpoint) {
  if (endpoint.kind == Endpoint::Kind::Stdio) return std::make_unique<StdioConnection>(endpoint.command);
  return std::make_unique<TcpConnection>(endpoint.host, endpoint.port);
}

ExternalEvaluator::ExternalEvaluator(Endpoint endpoint, SearchSpaceConfig space, ExternalTimeouts timeouts)
    : endpoint_(std::move(endpoint)), space_(std::move(space)), timeouts_(timeouts) {
  // Writes to a dead worker must surface as EPIPE, not kill the engine.
  ::signal(SIGPIPE, SIG_IGN);
}

ExternalEvaluator::~ExternalEvaluator() = default;

std::size_t ExternalEvaluator::idle_connections() const {
  std::lock_guard lock(pool_mutex_);
  return idle_.size();
}

std::unique_ptr<WorkerConnection> ExternalEvaluator::acquire() {
  {
    std::lock_guard lock(pool_mutex_);
    if (!idle_.empty()) {
      auto conn = std::move(idle_.back());
      idle_.pop_back();
      return conn;
    }
  }
  auto conn = WorkerConnection::open(endpoint_);
  check_hello(conn->read_line(std::chrono::steady_clock::now() + timeouts_.handshake));
  return conn;
}

void ExternalEvaluator::release(std::unique_ptr<WorkerConnection> conn) {
  std::lock_guard lock(pool_mutex_);
  idle_.push_back(std::move(conn));
}

EvalResult ExternalEvaluator::evaluate(const ArchCode& arch, const EvalBudget& budget) {
  return request(arch, budget, std::nullopt);
}

EvalResult ExternalEvaluator::evaluate_shared(const ArchCode& arch, const EvalBudget& budget,
                                              const std::vector<std::string>& share) {
  return request(arch, budget, share);
}

EvalResult ExternalEvaluator::request(const ArchCode& arch, const EvalBudget& budget,
                                      std::optional<std::vector<std::string>> share) {
  std::unique_ptr<WorkerConnection> conn;
  try {
    conn = acquire();
  } catch (const TimeoutError&) {
    return EvalResult::failed("timeout during handshake");
  } catch (const TransportError& e) {
    return EvalResult::failed(fmt::format("transport error: {}", e.what()));
  } catch (const ProtocolError& e) {
    return EvalResult::failed(fmt::format("protocol violation: {}", e.what()));
  }

  EvalRequestMessage req;
  req.id = next_id_.fetch_add(1);
  req.arch = arch;
  req.epochs = budget.epochs;
  req.space = space_;
  req.share = std::move(share);
  const auto timeout = budget.purpose == EvalPurpose::Rerank ? timeouts_.rerank : timeouts_.search;

  std::string line;
  try {
    conn->write_line(encode_request(req));
    line = conn->read_line(std::chrono::steady_clock::now() + timeout);
  } catch (const TimeoutError&) {
    spdlog::warn("external evaluator {}: request {} timed out", endpoint_.to_string(), req.id);
    return EvalResult::failed("timeout");
  } catch (const TransportError& e) {
    return EvalResult::failed(fmt::format("transport error: {}", e.what()));
  }

  EvalResponseMessage resp;
  try {
    resp = decode_response(line);
  } catch (const ProtocolError& e) {
    return EvalResult::failed(fmt::format("malformed response: {}", e.what()));
  }
  if (resp.id != req.id) {
    return EvalResult::failed(fmt::format("protocol violation: response id {} != request id {}", resp.id, req.id));
  }
  release(std::move(conn));
  return resp.result;
}

}  // namespace eatnas
