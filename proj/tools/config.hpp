// Copyright 2026 The QNL Authors
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

// Strict TOML-subset reader for experiment configs. Supports [section]
// headers, `key = value` with numbers, "strings", booleans and one-line
// arrays, and '#' comments. Anything else is a line-anchored error.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qnl::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Scalar = std::variant<double, std::string, bool>;

struct ConfigValue {
  std::variant<Scalar, std::vector<Scalar>> value;
  int line = 0;
  bool is_integer = false;  // every numeric element had no fraction or exponent
};

class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text, const std::string& origin);
  static ConfigFile load(const std::string& path);

  const std::string& origin() const { return origin_; }
  const std::string& text() const { return text_; }
  bool has(const std::string& section, const std::string& key) const;

  double number(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& section, const std::string& key, std::int64_t fallback) const;
  bool boolean(const std::string& section, const std::string& key, bool fallback) const;
  std::string string(const std::string& section, const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key,
                              const std::vector<double>& fallback) const;
  std::optional<double> optional_number(const std::string& section, const std::string& key) const;

  /// Rejects sections and keys outside `schema` (section -> allowed keys).
  void check_keys(const std::map<std::string, std::set<std::string>>& schema) const;

  /// Error message anchored at the line defining `section.key`.
  std::string where(const std::string& section, const std::string& key) const;

 private:
  const ConfigValue* find(const std::string& section, const std::string& key) const;

  std::string origin_;
  std::string text_;
  std::map<std::string, std::map<std::string, ConfigValue>> sections_;
  std::map<std::string, int> section_lines_;
};

}  // namespace qnl::cli
