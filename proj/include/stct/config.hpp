#pragma once

// Flat `key = value` configuration text with `#` comments.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace stct::config {

class ConfigFile {
 public:
  ConfigFile() = default;

  /// Throws UsageError naming the line on malformed input or duplicate keys.
  static ConfigFile parse(const std::string& text, const std::string& origin = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  /// Directory relative paths in the file are resolved against.
  const std::filesystem::path& base_dir() const noexcept { return base_; }
  const std::string& origin() const noexcept { return origin_; }

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  // Typed getters mark the key as consumed; a missing key yields the fallback.
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<int> get_ints(const std::string& key, std::vector<int> fallback) const;
  std::optional<std::string> get_optional(const std::string& key) const;
  std::filesystem::path get_path(const std::string& key, const std::filesystem::path& fallback) const;

  /// Keys never read by a getter.
  std::vector<std::string> unused_keys() const;
  /// Throws UsageError listing unused keys.
  void require_all_used() const;

 private:
  std::string raw(const std::string& key) const;
  [[noreturn]] void bad_value(const std::string& key, const std::string& expected) const;

  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  mutable std::set<std::string> used_;
  std::filesystem::path base_;
  std::string origin_ = "<config>";
};

}  // namespace stct::config
