#pragma once

// Scenario files are plain text:
//
//   # comment
//   [system]
//   alpha = 7/3
//   mu = 0.3
//
// Keys are addressed as "section.key".  Numbers accept decimals, fractions
// ("7/3") and multiples of pi ("pi/2", "3*pi/4").  Lists are comma separated.
// Unknown keys are rejected so that typos do not silently fall back to
// defaults.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "benjctl/spectrum.hpp"

namespace benjctl::app {

class Scenario {
 public:
  static Scenario parse(std::string_view text, const std::string& source = "<scenario>");
  static Scenario load(const std::filesystem::path& path);

  /// Sets "section.key"; throws ValidationError for unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Parses "section.key=value".
  void set_assignment(const std::string& assignment);
  void erase(const std::string& key) { entries_.erase(key); }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> raw(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  Rational get_rational(const std::string& key, Rational fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  /// Sorted "section.key = value" lines; the basis of the scenario hash.
  std::string canonical() const;
  /// FNV-1a 64-bit hash of canonical(), as 16 hex digits.
  std::string hash() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Number syntax described above.  Throws ValidationError naming the key.
double parse_number(std::string_view text, const std::string& key);
std::vector<std::string> split_list(std::string_view text);

bool is_known_key(const std::string& key);

}  // namespace benjctl::app
