#pragma once

#include <map>
#include <optional>
#include <string>

namespace bsq5 {

/// Flat key=value configuration: one assignment per line, '#' comments,
/// blank lines ignored. Later assignments win.
class Config {
 public:
  Config() = default;
  static Config parse_file(const std::string& path);       // throws on I/O error
  static Config parse_string(const std::string& text);     // throws on bad lines

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::string> get_string(const std::string& key) const;
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  const std::map<std::string, std::string>& items() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace bsq5
