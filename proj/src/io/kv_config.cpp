// SPDX-License-Identifier: Apache-2.0
#include "jppnet/io/kv_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "jppnet/core/errors.hpp"

namespace jpp::io {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.contains(key)) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    cfg.entries_.emplace_back(key, value);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

bool KeyValueConfig::contains(const std::string& key) const { return find(key).has_value(); }

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  long long out = 0;
  const auto* end = v->data() + v->size();
  const auto res = std::from_chars(v->data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + *v + "'");
  }
  return out;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double out = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + *v + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + *v + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key,
                                                std::vector<double> fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) {
    KeyValueConfig one;
    one.entries_.emplace_back(key, item);
    out.push_back(one.get_double(key, 0.0));
  }
  return out;
}

std::vector<int> KeyValueConfig::get_ints(const std::string& key,
                                          std::vector<int> fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  std::vector<int> out;
  for (const auto& item : split_list(*v)) {
    KeyValueConfig one;
    one.entries_.emplace_back(key, item);
    out.push_back(static_cast<int>(one.get_int(key, 0)));
  }
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

std::vector<std::string> KeyValueConfig::unknown_keys(const std::vector<std::string>& known) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (std::find(known.begin(), known.end(), k) == known.end()) out.push_back(k);
  }
  return out;
}

std::string KeyValueConfig::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace jpp::io
