#pragma once

// Flat sectioned key = value configuration.
//
//   # comment
//   [model]
//   sigma = 1
//   tau = 2
//
// Keys are addressed as "section.key". Later assignments win, which is how
// command-line overrides are layered on top of a file.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace infolearn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  using Section = std::map<std::string, std::string>;

  static Config parse(std::istream& in) {
    Config cfg;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto text = trim(line);
      if (text.empty() || text.front() == '#' || text.front() == ';') continue;
      if (text.front() == '[') {
        if (text.back() != ']' || text.size() < 3)
          throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
        section = std::string(trim(text.substr(1, text.size() - 2)));
        if (!valid_name(section))
          throw ConfigError("line " + std::to_string(lineno) + ": bad section name");
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      if (section.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
      const auto key = std::string(trim(text.substr(0, eq)));
      if (!valid_name(key)) throw ConfigError("line " + std::to_string(lineno) + ": bad key");
      cfg.sections_[section][key] = std::string(trim(text.substr(eq + 1)));
    }
    return cfg;
  }

  static Config parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  std::string serialize() const {
    std::string out;
    for (const auto& [name, entries] : sections_) {
      if (entries.empty()) continue;
      if (!out.empty()) out += '\n';
      out += '[' + name + "]\n";
      for (const auto& [k, v] : entries) out += k + " = " + v + '\n';
    }
    return out;
  }

  /// Set "section.key".
  void set(std::string_view dotted, std::string value) {
    auto [s, k] = split(dotted);
    sections_[s][k] = std::move(value);
  }

  void merge(const Config& other) {
    for (const auto& [s, entries] : other.sections_)
      for (const auto& [k, v] : entries) sections_[s][k] = v;
  }

  bool has(std::string_view dotted) const { return raw(dotted).has_value(); }

  std::optional<std::string> raw(std::string_view dotted) const {
    auto [s, k] = split(dotted);
    auto it = sections_.find(s);
    if (it == sections_.end()) return std::nullopt;
    auto jt = it->second.find(k);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
  }

  std::string get_string(std::string_view dotted, std::string fallback) const {
    return raw(dotted).value_or(std::move(fallback));
  }

  std::optional<double> get_double(std::string_view dotted) const {
    return get_number<double>(dotted);
  }
  double get_double(std::string_view dotted, double fallback) const {
    return get_double(dotted).value_or(fallback);
  }

  std::optional<std::uint64_t> get_uint(std::string_view dotted) const {
    return get_number<std::uint64_t>(dotted);
  }
  std::uint64_t get_uint(std::string_view dotted, std::uint64_t fallback) const {
    return get_uint(dotted).value_or(fallback);
  }

  bool get_bool(std::string_view dotted, bool fallback) const {
    const auto v = raw(dotted);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError(std::string(dotted) + ": expected a boolean, got '" + *v + "'");
  }

  const std::map<std::string, Section>& sections() const { return sections_; }

  friend bool operator==(const Config&, const Config&) = default;

 private:
  std::map<std::string, Section> sections_;

  static std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static bool valid_name(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
  }

  static std::pair<std::string, std::string> split(std::string_view dotted) {
    const auto dot = dotted.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == dotted.size())
      throw ConfigError("config key must be section.key: " + std::string(dotted));
    return {std::string(dotted.substr(0, dot)), std::string(dotted.substr(dot + 1))};
  }

  template <class T>
  std::optional<T> get_number(std::string_view dotted) const {
    const auto v = raw(dotted);
    if (!v) return std::nullopt;
    T out{};
    const char* first = v->data();
    const char* last = first + v->size();
    if (!v->empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || v->empty())
      throw ConfigError(std::string(dotted) + ": not a valid number: '" + *v + "'");
    return out;
  }
};

}  // namespace infolearn
