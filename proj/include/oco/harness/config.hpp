#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace oco::harness {

using json = nlohmann::json;

/// Malformed or incomplete run configuration (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

/// Applies "a.b.c=value". The value is parsed as JSON when possible
/// (numbers, booleans, arrays), otherwise stored as a string.
inline void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("empty path component in override: " + assignment);
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override path crosses a non-object: " + assignment);
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

/// Typed lookup with a default; wrong types raise ConfigError.
template <class T>
T get_or(const json& j, const std::string& key, const T& fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "' has the wrong type: " + e.what());
  }
}

template <class T>
T get_required(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError("missing config key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "' has the wrong type: " + e.what());
  }
}

inline const json& section(const json& cfg, const std::string& key) {
  static const json empty = json::object();
  if (!cfg.contains(key)) return empty;
  if (!cfg.at(key).is_object()) throw ConfigError("config section '" + key + "' must be an object");
  return cfg.at(key);
}

}  // namespace oco::harness
