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

#include "eatnas/logging.hpp"

#include <cstdlib>
#include <memory>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace eatnas {

void init_logging(std::optional<std::string> level, const std::string& fallback) {
  if (!level) {
    if (const char* env = std::getenv("EATNAS_LOG"); env != nullptr && *env != '\0') level = env;
  }
  const std::string name = level.value_or(fallback);
  const auto parsed = spdlog::level::from_str(name);
  if (parsed == spdlog::level::off && name != "off") {
    throw std::invalid_argument(fmt::format("unknown log level '{}'", name));
  }
  spdlog::drop("eatnas");
  auto logger = std::make_shared<spdlog::logger>("eatnas", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  logger->set_pattern("[%H:%M:%S.%e] [%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(parsed);
}

}  // namespace eatnas
