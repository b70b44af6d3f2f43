#pragma once

#include <map>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "asbim/error.hpp"
#include "asbim/text_io.hpp"

namespace asbim::config {

/// `key = value` lines; `#` starts a comment. Tracks which keys were consumed so
/// callers can reject typos.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text, const std::string& source = "config") {
    KeyValues kv;
    const auto lines = io::lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      std::string_view line = lines[i];
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = io::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(source + " line " + std::to_string(i + 1) + ": expected key=value");
      }
      const std::string key(io::trim(line.substr(0, eq)));
      if (key.empty()) throw ConfigError(source + " line " + std::to_string(i + 1) + ": empty key");
      kv.values_[key] = std::string(io::trim(line.substr(eq + 1)));
    }
    return kv;
  }

  static KeyValues load(const std::string& path) {
    std::string text;
    try {
      text = io::read_file(path);
    } catch (const Error&) {
      throw ConfigError("cannot read config file '" + path + "'");
    }
    return parse(text, path);
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }

  /// Overwrites `out` when `key` is present.
  template <class T>
  void read(const std::string& key, T& out) {
    const auto it = values_.find(key);
    if (it == values_.end()) return;
    consumed_.insert(key);
    out = convert<T>(key, it->second);
  }

  std::vector<std::string> unused() const {
    std::vector<std::string> keys;
    for (const auto& [k, v] : values_) {
      if (!consumed_.count(k)) keys.push_back(k);
    }
    return keys;
  }

  void reject_unused() const {
    const auto keys = unused();
    if (keys.empty()) return;
    std::string msg = "unknown config key(s):";
    for (const auto& k : keys) msg += " " + k;
    throw ConfigError(msg);
  }

 private:
  template <class T>
  static T convert(const std::string& key, const std::string& raw) {
    if constexpr (std::is_same_v<T, std::string>) {
      return raw;
    } else if constexpr (std::is_enum_v<T>) {
      // Found by ADL next to the enum.
      return parse_enum(raw, static_cast<T*>(nullptr));
    } else if constexpr (std::is_same_v<T, bool>) {
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
      throw ConfigError("config key '" + key + "': expected true/false, got '" + raw + "'");
    } else if constexpr (std::is_integral_v<T>) {
      const auto v = io::parse_int(raw);
      if (!v) throw ConfigError("config key '" + key + "': expected an integer, got '" + raw + "'");
      if constexpr (std::is_unsigned_v<T>) {
        if (*v < 0) throw ConfigError("config key '" + key + "': must be nonnegative");
      }
      return static_cast<T>(*v);
    } else {
      const auto v = io::parse_double(raw);
      if (!v) throw ConfigError("config key '" + key + "': expected a number, got '" + raw + "'");
      return *v;
    }
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

template <class T>
std::string to_text(const T& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_enum_v<T>) {
    return std::string(to_string(v));
  } else if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(v);
  } else {
    return io::format_double(v);
  }
}

/// Reads every field a struct exposes through `visit_fields(obj, f)`.
template <class Config>
void apply(KeyValues& kv, Config& cfg) {
  visit_fields(cfg, [&](const char* key, auto& field) { kv.read(key, field); });
}

/// `key=value` echo, one line per field, in declaration order.
template <class Config>
std::string echo(const Config& cfg) {
  std::string out;
  auto copy = cfg;
  visit_fields(copy, [&](const char* key, auto& field) { out += std::string(key) + "=" + to_text(field) + "\n"; });
  return out;
}

}  // namespace asbim::config
