#ifndef PPCLUST_CONFIG_HPP
#define PPCLUST_CONFIG_HPP

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"
#include "dists.hpp"
#include "format.hpp"

namespace ppclust {

/// Bad or unknown configuration input; the message names key and line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Flat key = value text with [section] headers. Keys are addressed as
/// "section.key". Every read is recorded, defaults included, so the
/// resolved configuration can be echoed and unread keys rejected.
///
///   # comment
///   [generator]
///   family = poisson
///   intensity = 1
class Config {
 public:
  struct Entry {
    std::string value;
    std::string origin;  ///< "file:line" or "command line"
  };

  static Config parse(std::string_view text, const std::string& source = "<config>") {
    Config c;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string where = source + ":" + std::to_string(line_no);
      std::string_view line = detail::trim(raw);
      if (line.empty() || line.front() == '#' || line.front() == ';') continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
        section = std::string(detail::trim(line.substr(1, line.size() - 2)));
        if (!valid_name(section)) throw ConfigError(where + ": bad section name '" + section + "'");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
      const std::string key(detail::trim(line.substr(0, eq)));
      if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside any [section]");
      if (!valid_name(key)) throw ConfigError(where + ": bad key name '" + key + "'");
      const std::string full = section + "." + key;
      if (c.entries_.count(full)) throw ConfigError(where + ": duplicate key '" + full + "'");
      c.entries_[full] = {std::string(detail::trim(line.substr(eq + 1))), where};
    }
    return c;
  }

  /// Command-line override of "section.key".
  void set(const std::string& full_key, const std::string& value, const std::string& origin = "command line") {
    const auto dot = full_key.find('.');
    if (dot == std::string::npos || !valid_name(full_key.substr(0, dot)) || !valid_name(full_key.substr(dot + 1)))
      throw ConfigError(origin + ": override must be --section.key, got '" + full_key + "'");
    entries_[full_key] = {value, origin};
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  bool has_section(const std::string& section) const {
    const std::string prefix = section + ".";
    for (const auto& [k, e] : entries_)
      if (k.compare(0, prefix.size(), prefix) == 0) return true;
    return false;
  }

  /// Raw string value, or the default when absent.
  std::string get_string(const std::string& key, const std::optional<std::string>& fallback = std::nullopt) {
    if (const auto it = entries_.find(key); it != entries_.end()) {
      used_[key] = it->second.value;
      return it->second.value;
    }
    if (!fallback) throw ConfigError("missing required key '" + key + "'");
    used_[key] = *fallback;
    return *fallback;
  }

  double get_real(const std::string& key, std::optional<double> fallback = std::nullopt) {
    return typed(key, fallback ? std::optional(format_real(*fallback)) : std::nullopt,
                 [](std::string_view s) { return parse_real(s); });
  }

  long long get_int(const std::string& key, std::optional<long long> fallback = std::nullopt) {
    return typed(key, fallback ? std::optional(std::to_string(*fallback)) : std::nullopt,
                 [](std::string_view s) { return parse_integer(s); });
  }

  bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt) {
    return typed(key, fallback ? std::optional<std::string>(*fallback ? "true" : "false") : std::nullopt,
                 [](std::string_view s) {
                   if (s == "true" || s == "1" || s == "yes") return true;
                   if (s == "false" || s == "0" || s == "no") return false;
                   throw InvalidArgument("not a boolean: '" + std::string(s) + "'");
                 });
  }

  /// Comma list "a, b, c" or inclusive range "lo:hi:step"; empty text gives
  /// an empty list.
  std::vector<double> get_reals(const std::string& key, const std::optional<std::string>& fallback = std::nullopt) {
    return typed(key, fallback, [](std::string_view s) { return parse_real_list(s); });
  }

  std::vector<long long> get_ints(const std::string& key, const std::optional<std::string>& fallback = std::nullopt) {
    return typed(key, fallback, [](std::string_view s) {
      std::vector<long long> out;
      if (detail::trim(s).empty()) return out;
      for (auto part : detail::split_top_level(s)) out.push_back(parse_integer(part));
      return out;
    });
  }

  /// Wraps a parser so that failures name the key and its origin.
  template <class Parse>
  auto typed(const std::string& key, const std::optional<std::string>& fallback, Parse parse)
      -> decltype(parse(std::string_view{})) {
    const std::string text = get_string(key, fallback);
    try {
      return parse(std::string_view(text));
    } catch (const Error& e) {
      throw ConfigError(origin_of(key) + ": key '" + key + "': " + e.what());
    }
  }

  /// Origin of the earliest line in a section, for errors about the section
  /// as a whole.
  std::string section_origin(const std::string& section) const {
    const std::string prefix = section + ".";
    std::string best = "default";
    long best_line = -1;
    for (const auto& [k, e] : entries_) {
      if (k.compare(0, prefix.size(), prefix) != 0) continue;
      const auto colon = e.origin.rfind(':');
      const long line = colon == std::string::npos ? 0 : std::strtol(e.origin.c_str() + colon + 1, nullptr, 10);
      if (best_line < 0 || line < best_line) best = e.origin, best_line = line;
    }
    return best;
  }

  std::string origin_of(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? "default" : it->second.origin;
  }

  /// Throws for the first key that was never read.
  void reject_unused() const {
    for (const auto& [k, e] : entries_)
      if (!used_.count(k)) throw ConfigError(e.origin + ": unknown key '" + k + "'");
  }

  /// Every value read so far, defaults included, as config text.
  std::string resolved_text(const std::string& header) const {
    std::string out = header;
    std::string section;
    for (const auto& [k, v] : used_) {
      const auto dot = k.find('.');
      const std::string s = k.substr(0, dot);
      if (s != section) {
        out += (out.empty() ? "" : "\n") + std::string("[") + s + "]\n";
        section = s;
      }
      out += k.substr(dot + 1) + " = " + v + "\n";
    }
    return out;
  }

  static std::vector<double> parse_real_list(std::string_view s) {
    std::vector<double> out;
    s = detail::trim(s);
    if (s.empty()) return out;
    if (s.find(':') != std::string_view::npos) {
      const auto a = s.find(':'), b = s.find(':', a + 1);
      if (b == std::string_view::npos) throw InvalidArgument("range must be lo:hi:step");
      const double lo = parse_real(s.substr(0, a)), hi = parse_real(s.substr(a + 1, b - a - 1)),
                   step = parse_real(s.substr(b + 1));
      if (!(step > 0) || !(hi >= lo)) throw InvalidArgument("range needs lo <= hi and step > 0");
      const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
      if (n > 100000) throw InvalidArgument("range has too many points");
      for (long long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
      return out;
    }
    for (auto part : detail::split_top_level(s)) out.push_back(parse_real(part));
    return out;
  }

 private:
  static bool valid_name(std::string_view s) {
    if (s.empty()) return false;
    for (char ch : s)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_')) return false;
    return true;
  }

  std::map<std::string, Entry> entries_;
  std::map<std::string, std::string> used_;
};

}  // namespace ppclust

#endif  // PPCLUST_CONFIG_HPP
