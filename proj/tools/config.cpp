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

#include "config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qnl::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strip a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool valid_bare_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

Scalar parse_scalar(const std::string& raw, const std::string& origin, int line, bool& integral) {
  const std::string s = trim(raw);
  if (s.empty()) fail(origin, line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') fail(origin, line, "unterminated string");
    const std::string body = s.substr(1, s.size() - 2);
    if (body.find('"') != std::string::npos || body.find('\\') != std::string::npos) {
      fail(origin, line, "escapes and embedded quotes are not supported in strings");
    }
    return body;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  std::string digits;
  for (char c : s) {
    if (c != '_') digits.push_back(c);
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(digits, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != digits.size() || !std::isfinite(v)) fail(origin, line, "cannot parse value '" + s + "'");
  integral = digits.find_first_of(".eE") == std::string::npos;
  return v;
}

}  // namespace

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  cfg.sections_[section];
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) fail(origin, line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_bare_key(section)) fail(origin, line, "invalid section name '" + section + "'");
      if (cfg.section_lines_.count(section)) fail(origin, line, "duplicate section [" + section + "]");
      cfg.section_lines_[section] = line;
      cfg.sections_[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string rhs = trim(s.substr(eq + 1));
    if (!valid_bare_key(key)) fail(origin, line, "invalid key '" + key + "'");
    auto& entries = cfg.sections_[section];
    if (entries.count(key)) fail(origin, line, "duplicate key '" + key + "'");

    ConfigValue value;
    value.line = line;
    if (!rhs.empty() && rhs.front() == '[') {
      if (rhs.back() != ']') fail(origin, line, "arrays must open and close on one line");
      std::vector<Scalar> items;
      bool all_int = true;
      const std::string body = trim(rhs.substr(1, rhs.size() - 2));
      if (!body.empty()) {
        std::string item;
        std::istringstream parts(body);
        while (std::getline(parts, item, ',')) {
          if (trim(item).empty()) continue;  // trailing comma
          bool integral = false;
          items.push_back(parse_scalar(item, origin, line, integral));
          all_int = all_int && integral;
        }
      }
      value.value = std::move(items);
      value.is_integer = all_int;
    } else {
      bool integral = false;
      value.value = parse_scalar(rhs, origin, line, integral);
      value.is_integer = integral;
    }
    entries.emplace(key, std::move(value));
  }
  return cfg;
}

const ConfigValue* ConfigFile::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

std::string ConfigFile::where(const std::string& section, const std::string& key) const {
  const ConfigValue* v = find(section, key);
  const std::string name = section.empty() ? key : section + "." + key;
  return v ? origin_ + ":" + std::to_string(v->line) + ": '" + name + "'" : origin_ + ": '" + name + "'";
}

double ConfigFile::number(const std::string& section, const std::string& key, double fallback) const {
  const ConfigValue* v = find(section, key);
  if (!v) return fallback;
  const auto* scalar = std::get_if<Scalar>(&v->value);
  const double* d = scalar ? std::get_if<double>(scalar) : nullptr;
  if (!d) throw ConfigError(where(section, key) + " must be a number");
  return *d;
}

std::optional<double> ConfigFile::optional_number(const std::string& section, const std::string& key) const {
  if (!has(section, key)) return std::nullopt;
  return number(section, key, 0.0);
}

std::int64_t ConfigFile::integer(const std::string& section, const std::string& key, std::int64_t fallback) const {
  const ConfigValue* v = find(section, key);
  if (!v) return fallback;
  const double d = number(section, key, 0.0);
  if (!v->is_integer || std::abs(d) > 9.0e15) throw ConfigError(where(section, key) + " must be an integer");
  return static_cast<std::int64_t>(d);
}

bool ConfigFile::boolean(const std::string& section, const std::string& key, bool fallback) const {
  const ConfigValue* v = find(section, key);
  if (!v) return fallback;
  const auto* scalar = std::get_if<Scalar>(&v->value);
  const bool* b = scalar ? std::get_if<bool>(scalar) : nullptr;
  if (!b) throw ConfigError(where(section, key) + " must be true or false");
  return *b;
}

std::string ConfigFile::string(const std::string& section, const std::string& key, const std::string& fallback) const {
  const ConfigValue* v = find(section, key);
  if (!v) return fallback;
  const auto* scalar = std::get_if<Scalar>(&v->value);
  const std::string* s = scalar ? std::get_if<std::string>(scalar) : nullptr;
  if (!s) throw ConfigError(where(section, key) + " must be a quoted string");
  return *s;
}

std::vector<double> ConfigFile::numbers(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
  const ConfigValue* v = find(section, key);
  if (!v) return fallback;
  const auto* items = std::get_if<std::vector<Scalar>>(&v->value);
  if (!items) throw ConfigError(where(section, key) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& item : *items) {
    const double* d = std::get_if<double>(&item);
    if (!d) throw ConfigError(where(section, key) + " must be an array of numbers");
    out.push_back(*d);
  }
  return out;
}

void ConfigFile::check_keys(const std::map<std::string, std::set<std::string>>& schema) const {
  for (const auto& [section, entries] : sections_) {
    const auto allowed = schema.find(section);
    if (allowed == schema.end()) {
      if (entries.empty() && section.empty()) continue;
      const int line = section_lines_.count(section) ? section_lines_.at(section) : entries.begin()->second.line;
      fail(origin_, line, "unknown section [" + section + "]");
    }
    for (const auto& [key, value] : entries) {
      if (!allowed->second.count(key)) {
        fail(origin_, value.line, "unknown key '" + key + "' in " +
                                      (section.empty() ? std::string("top level") : "[" + section + "]") +
                                      " (physical quantities need a unit suffix, e.g. t1_us)");
      }
    }
  }
}

}  // namespace qnl::cli
