#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgamp {

/// Raised on malformed config text, unknown keys, or invalid field values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text with '#' comments. Keys keep file order;
/// duplicate keys are rejected.
class KvBlock {
 public:
  static KvBlock parse(const std::string& text);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;

  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  /// Errors out if the block contains a key outside `allowed`.
  void require_known_keys(const std::vector<std::string>& allowed) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void set(const std::string& key, const std::string& value);
  std::string to_text() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_double(double v);
std::string format_double_list(const std::vector<double>& v);
std::string format_int_list(const std::vector<int>& v);

}  // namespace qgamp
