#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace arbor {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Flat key = value settings. '#' starts a comment; later assignments win.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>") {
    KeyValueConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      c.values_[key] = trim(line.substr(eq + 1));
    }
    return c;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse(os.str(), path);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return convert<double>(key, [](const std::string& s, std::size_t* n) { return std::stod(s, n); });
  }

  long long get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    return convert<long long>(key, [](const std::string& s, std::size_t* n) { return std::stoll(s, n); });
  }

  unsigned long long get_uint(const std::string& key, unsigned long long fallback) const {
    if (!has(key)) return fallback;
    if (values_.at(key).find('-') != std::string::npos) throw ConfigError("config key '" + key + "' must be >= 0");
    return convert<unsigned long long>(key, [](const std::string& s, std::size_t* n) { return std::stoull(s, n); });
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = values_.at(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "' is not a boolean: " + v);
  }

  std::string dump() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  }

  template <class T, class F>
  T convert(const std::string& key, F f) const {
    const auto& v = values_.at(key);
    try {
      std::size_t used = 0;
      T out = f(v, &used);
      if (used != v.size()) throw std::invalid_argument("trailing characters");
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' has bad value '" + v + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace arbor
