#ifndef PPCLUST_FORMAT_HPP
#define PPCLUST_FORMAT_HPP

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>

#include "core.hpp"

namespace ppclust {

/// Shortest decimal text that parses back to the same double.
inline std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Fixed 17-significant-digit format used for CSV output.
inline std::string format_csv_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw InvalidArgument("not a number: '" + std::string(s) + "'");
  return v;
}

inline long long parse_integer(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw InvalidArgument("not an integer: '" + std::string(s) + "'");
  return v;
}

}  // namespace ppclust

#endif  // PPCLUST_FORMAT_HPP
