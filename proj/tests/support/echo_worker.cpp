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

// Loopback worker for tests. Speaks the evaluator protocol on stdio, or on TCP
// with --listen PORT (PORT 0 picks a free port and prints it on stdout).
//
//   --mode ok        accuracy 0.5 with analytic sizes (default)
//   --mode hang      reads requests and never answers
//   --mode exit      exits after reading the first request
//   --mode bad-id    answers with the wrong id
//   --mode garbage   answers with a line that is not a response
//   --mode bad-hello announces protocol version 2

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "eatnas/model_metrics.hpp"
#include "eatnas/protocol.hpp"

namespace {

using eatnas::EvalResponseMessage;
using eatnas::EvalResult;
using eatnas::EvalStatus;

std::string answer(const std::string& mode, const std::string& line) {
  eatnas::EvalRequestMessage req;
  try {
    req = eatnas::decode_request(line);
  } catch (const std::exception& e) {
    return eatnas::encode_response({0, EvalResult::failed(fmt::format("bad request: {}", e.what()))});
  }
  if (mode == "garbage") return "this is not a response";
  EvalResponseMessage resp;
  resp.id = mode == "bad-id" ? req.id + 1 : req.id;
  if (req.epochs < 1) {
    resp.result = EvalResult::failed("epochs >= 1 required");
  } else {
    resp.result.status = EvalStatus::Ok;
    resp.result.accuracy = 0.5;
    resp.result.params = eatnas::arch_params(req.arch, req.space, {true});
    resp.result.multadds = eatnas::arch_multadds(req.arch, req.space, {true});
    resp.result.detail = req.share ? fmt::format("share {}", req.share->size()) : "";
  }
  return eatnas::encode_response(resp);
}

std::string hello(const std::string& mode) {
  return mode == "bad-hello" ? std::string(R"({"hello": "eatnas-worker", "proto": 2})") : eatnas::hello_line();
}

void hang_forever() {
  for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
}

void serve_stdio(const std::string& mode) {
  std::cout << hello(mode) << std::endl;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "exit") std::_Exit(0);
    if (mode == "hang") hang_forever();
    std::cout << answer(mode, line) << std::endl;
  }
}

bool send_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

void serve_socket(int fd, std::string mode) {
  if (!send_all(fd, hello(mode) + "\n")) {
    ::close(fd);
    return;
  }
  std::string buf;
  char chunk[4096];
  for (;;) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buf.find('\n')) != std::string::npos) {
      const std::string line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      if (mode == "exit") std::_Exit(0);
      if (mode == "hang") hang_forever();
      if (!send_all(fd, answer(mode, line) + "\n")) break;
    }
  }
  ::close(fd);
}

int serve_tcp(const std::string& mode, int port) {
  const int srv = ::socket(AF_INET, SOCK_STREAM, 0);
  if (srv < 0) return 1;
  int one = 1;
  ::setsockopt(srv, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(srv, 16) != 0) return 1;
  socklen_t len = sizeof(addr);
  ::getsockname(srv, reinterpret_cast<sockaddr*>(&addr), &len);
  std::cout << ntohs(addr.sin_port) << std::endl;
  for (;;) {
    const int fd = ::accept(srv, nullptr, nullptr);
    if (fd < 0) continue;
    std::thread(serve_socket, fd, mode).detach();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loopback evaluator worker"};
  std::string mode = "ok";
  int port = -1;
  app.add_option("--mode", mode)->check(CLI::IsMember({"ok", "hang", "exit", "bad-id", "garbage", "bad-hello"}));
  app.add_option("--listen", port);
  CLI11_PARSE(app, argc, argv);
  if (port >= 0) return serve_tcp(mode, port);
  serve_stdio(mode);
  return 0;
}
