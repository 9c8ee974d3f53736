// Copyright 2026 The adrq Authors
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

/// Flat `key = value` configuration files. Keys use dotted section prefixes
/// (`adr.D`, `carleman.K_list`); `#` starts a comment.
#pragma once

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace adrq {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace detail

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream &in, const std::string &origin = "<input>") {
    KeyValueConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      line = detail::trim(line);
      if (line.empty())
        continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      if (!cfg.values_.emplace(key, value).second)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return cfg;
  }

  static KeyValueConfig parse_string(const std::string &text) {
    std::istringstream in(text);
    return parse(in);
  }

  static KeyValueConfig load(const std::string &path) {
    std::ifstream in(path);
    if (!in)
      throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  bool has(const std::string &key) const { return values_.count(key) != 0; }

  void set(const std::string &key, const std::string &value) { values_[key] = value; }

  std::string get_string(const std::string &key, const std::string &fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string &key, double fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
  }

  std::size_t get_size(const std::string &key, std::size_t fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_size(key, it->second);
  }

  bool get_bool(const std::string &key, bool fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end())
      return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes")
      return true;
    if (it->second == "false" || it->second == "0" || it->second == "no")
      return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + it->second + "'");
  }

  /// Comma list, an inclusive range `start:stop:step`, or `none` for empty.
  std::vector<double> get_doubles(const std::string &key, std::vector<double> fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_doubles(key, it->second);
  }

  std::vector<std::size_t> get_sizes(const std::string &key, std::vector<std::size_t> fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end())
      return fallback;
    std::vector<std::size_t> out;
    for (double v : to_doubles(key, it->second)) {
      if (v < 0 || v != std::floor(v))
        throw ConfigError("key '" + key + "': expected non-negative integers");
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  }

  /// Keys present in the file but never read.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto &[k, v] : values_)
      if (!used_.count(k))
        out.push_back(k);
    return out;
  }

 private:
  static double to_double(const std::string &key, const std::string &s) {
    double v = 0.0;
    const char *end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v))
      throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
    return v;
  }

  static std::size_t to_size(const std::string &key, const std::string &s) {
    std::size_t v = 0;
    const char *end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end)
      throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + s + "'");
    return v;
  }

  static std::vector<double> to_doubles(const std::string &key, const std::string &s) {
    std::vector<double> out;
    if (s == "none")
      return out;
    if (s.find(':') != std::string::npos) {
      std::vector<double> parts;
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ':'))
        parts.push_back(to_double(key, detail::trim(item)));
      if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
        throw ConfigError("key '" + key + "': range must be start:stop:step with step > 0");
      const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
      // Round to 12 significant digits so 0:1:0.05 yields 0.15, not 0.15000000000000002.
      for (std::size_t i = 0; i <= count; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", parts[0] + static_cast<double>(i) * parts[2]);
        out.push_back(std::strtod(buf, nullptr));
      }
      return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
      out.push_back(to_double(key, detail::trim(item)));
    if (out.empty())
      throw ConfigError("key '" + key + "': empty list");
    return out;
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

}  // namespace adrq
