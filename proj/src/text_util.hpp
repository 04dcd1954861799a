#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kcomb/error.hpp"

namespace kcomb::detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view text, const std::string& what) {
  const std::string_view t = trim(text);
  // from_chars rejects a leading '+', which label and value columns use.
  const std::string_view body = (!t.empty() && t.front() == '+') ? t.substr(1) : t;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (body.empty() || ec != std::errc{} || ptr != body.data() + body.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::parse_error, what + ": '" + std::string(text) + "' is not a finite number");
  }
  return v;
}

inline std::int64_t parse_int(std::string_view text, const std::string& what) {
  const std::string_view t = trim(text);
  const std::string_view body = (!t.empty() && t.front() == '+') ? t.substr(1) : t;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (body.empty() || ec != std::errc{} || ptr != body.data() + body.size()) {
    throw Error(ErrorCode::parse_error, what + ": '" + std::string(text) + "' is not an integer");
  }
  return v;
}

// Shortest representation that round-trips.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// "a=1,b=2" -> {{"a","1"},{"b","2"}}. Empty input yields nothing.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text,
                                                                         char sep) {
  std::vector<std::pair<std::string, std::string>> out;
  if (trim(text).empty()) return out;
  for (const auto item : split(text, sep)) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::parse_error, "expected key=value, got '" + std::string(item) + "'");
    }
    out.emplace_back(std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1))));
  }
  return out;
}

}  // namespace kcomb::detail
