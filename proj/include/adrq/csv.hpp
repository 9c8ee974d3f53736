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

/// CSV tables with a `#`-prefixed metadata block. Doubles are written with 17
/// significant digits so values round-trip exactly.
#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adrq {

inline std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{})
    throw std::runtime_error("failed to format double");
  return std::string(buf, ptr);
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_meta(const std::string &key, const std::string &value) {
    meta_.emplace_back(key, value);
  }
  void add_meta(const std::string &key, double value) { add_meta(key, format_double(value)); }

  class Row {
   public:
    Row &operator<<(const std::string &s) { cells_.push_back(s); return *this; }
    Row &operator<<(const char *s) { cells_.emplace_back(s); return *this; }
    Row &operator<<(double v) { cells_.push_back(format_double(v)); return *this; }
    Row &operator<<(std::size_t v) { cells_.push_back(std::to_string(v)); return *this; }
    Row &operator<<(int v) { cells_.push_back(std::to_string(v)); return *this; }
    Row &operator<<(bool v) { cells_.emplace_back(v ? "1" : "0"); return *this; }

   private:
    friend class CsvTable;
    std::vector<std::string> cells_;
  };

  void add_row(const Row &row) {
    if (row.cells_.size() != columns_.size())
      throw std::logic_error("CSV row has " + std::to_string(row.cells_.size()) +
                             " cells, table has " + std::to_string(columns_.size()) + " columns");
    rows_.push_back(row.cells_);
  }

  std::size_t row_count() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    for (const auto &[k, v] : meta_)
      out += "# " + k + " = " + v + "\n";
    out += join(columns_) + "\n";
    for (const auto &r : rows_)
      out += join(r) + "\n";
    return out;
  }

  void write(const std::filesystem::path &path) const {
    if (path.has_parent_path())
      std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
      throw std::runtime_error("cannot write '" + path.string() + "'");
    f << str();
  }

 private:
  static std::string join(const std::vector<std::string> &cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i)
        s += ',';
      s += cells[i];
    }
    return s;
  }

  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace adrq
