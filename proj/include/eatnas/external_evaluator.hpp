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

// Client side of the evaluator wire protocol (see protocol.hpp).
//
// Endpoints are either "stdio:CMD", which spawns CMD through /bin/sh and talks
// over its stdin/stdout, or "HOST:PORT" for a TCP stream. Each connection
// carries one request at a time; concurrent callers get separate connections
// from a small pool. A connection that times out or misbehaves is closed (a
// spawned worker is killed) and never reused.

#ifndef EATNAS_EXTERNAL_EVALUATOR_HPP_
#define EATNAS_EXTERNAL_EVALUATOR_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "eatnas/evaluator.hpp"
#include "eatnas/search_space.hpp"

namespace eatnas {

struct Endpoint {
  enum class Kind { Stdio, Tcp };
  Kind kind = Kind::Stdio;
  std::string command;  // Stdio
  std::string host;     // Tcp
  int port = 0;         // Tcp

  // Throws std::invalid_argument for anything but "stdio:CMD" or "HOST:PORT".
  static Endpoint parse(const std::string& text);
  std::string to_string() const;
};

struct ExternalTimeouts {
  std::chrono::milliseconds search{900'000};
  std::chrono::milliseconds rerank{3'600'000};
  std::chrono::milliseconds handshake{30'000};
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

// One bidirectional line stream to a worker.
class WorkerConnection {
 public:
  virtual ~WorkerConnection() = default;
  virtual void write_line(const std::string& line) = 0;
  // Throws TimeoutError past the deadline, TransportError on EOF or I/O errors.
  virtual std::string read_line(std::chrono::steady_clock::time_point deadline) = 0;

  static std::unique_ptr<WorkerConnection> open(const Endpoint& endpoint);
};

class ExternalEvaluator final : public Evaluator {
 public:
  ExternalEvaluator(Endpoint endpoint, SearchSpaceConfig space, ExternalTimeouts timeouts = {});
  ~ExternalEvaluator() override;

  EvalResult evaluate(const ArchCode& arch, const EvalBudget& budget) override;
  EvalResult evaluate_shared(const ArchCode& arch, const EvalBudget& budget,
                             const std::vector<std::string>& share) override;

  std::string id() const override { return "external:" + endpoint_.to_string(); }
  bool deterministic() const override { return false; }
  bool thread_safe() const override { return true; }

  // Connections currently parked in the pool.
  std::size_t idle_connections() const;

 private:
  EvalResult request(const ArchCode& arch, const EvalBudget& budget,
                     std::optional<std::vector<std::string>> share);
  std::unique_ptr<WorkerConnection> acquire();
  void release(std::unique_ptr<WorkerConnection> conn);

  Endpoint endpoint_;
  SearchSpaceConfig space_;
  ExternalTimeouts timeouts_;
  std::atomic<std::uint64_t> next_id_{1};
  mutable std::mutex pool_mutex_;
  std::vector<std::unique_ptr<WorkerConnection>> idle_;
};

}  // namespace eatnas

#endif  // EATNAS_EXTERNAL_EVALUATOR_HPP_
