/* Copyright 2026 The liquidseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LIQUIDSEG_CONFIG_H_
#define LIQUIDSEG_CONFIG_H_

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Flat text configuration:
//
//   # comment
//   model.width = 32
//   train.lr = 0.001
//
// One `key = value` per line; keys are unique; surrounding whitespace is
// trimmed; `#` starts a comment only at the beginning of a line.
namespace liquidseg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text,
                              const std::string& origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  // `key=value`; later overrides replace earlier values.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  // Typed accessors. The key is marked consumed; the fallback is returned
  // when the key is absent. Malformed values raise ConfigError.
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Keys present but never read through a getter.
  std::vector<std::string> unused_keys() const;

  // Sorted by key, one `key = value` per line.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> consumed_;
};

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace liquidseg

#endif  // LIQUIDSEG_CONFIG_H_
