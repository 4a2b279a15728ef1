#pragma once

// Flat key=value configuration files.
//
//   # comment
//   H = 30
//   mu = 0
//
// Keys are case-sensitive, duplicates are rejected, values are trimmed.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace popnet {

class KeyValues {
 public:
  // Throws ParseError with the offending line number.
  static KeyValues parse(std::istream& in);
  static KeyValues load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& raw(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  // Typed accessors throw ConfigError naming the key on a bad value.
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;  // comma or space separated

  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  // Canonical text: sorted "key = value" lines.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace popnet
