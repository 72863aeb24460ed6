// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace jpp::io {

/// Flat `key = value` configuration file. Lines starting with '#' are
/// comments. Keys keep their file order so the text can be echoed verbatim.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;

  /// Typed getters; a malformed value raises ConfigError naming the key.
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<int> get_ints(const std::string& key, std::vector<int> fallback) const;

  void set(const std::string& key, const std::string& value);

  /// Keys present in the file but never read through a getter.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string to_string() const;
  const std::string& origin() const { return origin_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string origin_;
};

}  // namespace jpp::io
