// Copyright 2026 the lsrkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lsrkit {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();
// Parses "error" | "warn" | "info" | "debug"; throws std::invalid_argument.
LogLevel parse_log_level(std::string_view name);

void log_error(const std::string& msg);
void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

/// Parse failure in a line-oriented input file. what() carries "path:line: msg".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, std::size_t line, const std::string& msg);
  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

// Shortest decimal representation that parses back to the same double.
// Integral values keep a trailing ".0" so scores render as "5.0", not "5".
std::string format_double(double value);

// Strict full-token parse; returns false on trailing garbage or empty input.
bool parse_double(std::string_view text, double& out);
bool parse_u64(std::string_view text, std::uint64_t& out);

std::uint32_t crc32_bytes(std::string_view data);

std::string read_file(const std::filesystem::path& path);
// Write-then-rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string json_escape(std::string_view raw);

}  // namespace lsrkit
