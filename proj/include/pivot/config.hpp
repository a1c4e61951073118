#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>

#include "pivot/controller.hpp"  // ConfigError

namespace pivot {

// Flat key-value config file: one `key = value` per line, `#` comments,
// blank lines ignored.  Dotted keys group related settings by convention
// only (the file is not nested).
//
// Typed getters record which keys were read; require_all_consumed() then
// rejects files containing unknown keys, so typos fail loudly instead of
// silently falling back to defaults.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse_string(const std::string& text);
  static KeyValueConfig load_file(const std::string& path);

  bool has(const std::string& key) const;

  // Each getter returns the fallback when the key is absent and throws
  // ConfigError when the value does not parse as the requested type.
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;  // true/false/on/off/1/0
  std::string get_string(const std::string& key, const std::string& fallback) const;

  // Throws ConfigError naming every key that no getter has touched.
  void require_all_consumed() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> consumed_;
};

// Shortest decimal string that parses back to exactly the same double.
// All text output (configs, logs, result tables) goes through this so that
// repeated runs are byte-identical.
std::string format_double(double value);

}  // namespace pivot
