// Copyright 2026 The dpkan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Helpers for the line-oriented `key=value` text files (configs, reports,
// training logs). Doubles are written in shortest round-trip form.

#ifndef DPKAN_TEXT_FORMAT_HPP
#define DPKAN_TEXT_FORMAT_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "dpkan/error.hpp"

namespace dpkan::text {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view s, const std::string& what) {
  s = trim(s);
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && *first == '+') ++first;
  const auto r = std::from_chars(first, s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ParseError(what + ": expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::int64_t parse_int(std::string_view s, const std::string& what) {
  s = trim(s);
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ParseError(what + ": expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::uint64_t parse_uint(std::string_view s, const std::string& what) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ParseError(what + ": expected an unsigned integer, got '" + std::string(s) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view s, const std::string& what) {
  s = trim(s);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ParseError(what + ": expected true or false, got '" + std::string(s) + "'");
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, Fmt fmt, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += fmt(values[i]);
  }
  return out;
}

/// Splits "key=value"; returns false for blank lines and '#' comments.
inline bool split_key_value(std::string_view line, std::string& key, std::string& value,
                            std::size_t line_no) {
  const auto t = trim(line);
  if (t.empty() || t.front() == '#') return false;
  const auto eq = t.find('=');
  if (eq == std::string_view::npos) {
    throw ParseError("line " + std::to_string(line_no) + ": expected key=value, got '" +
                     std::string(t) + "'");
  }
  key = std::string(trim(t.substr(0, eq)));
  value = std::string(trim(t.substr(eq + 1)));
  if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key");
  return true;
}

}  // namespace dpkan::text

#endif  // DPKAN_TEXT_FORMAT_HPP
