#include "stct/config.hpp"

#include "stct/errors.hpp"
#include "stct/io.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace stct::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) throw UsageError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw UsageError(where + ": empty key");
    if (cfg.values_.count(key)) {
      throw UsageError(where + ": duplicate key '" + key + "' (first set on line " +
                       std::to_string(cfg.lines_[key]) + ")");
    }
    cfg.values_[key] = value;
    cfg.lines_[key] = number;
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("config file not found: " + path.string());
  ConfigFile cfg = parse(io::read_text(path), path.string());
  cfg.base_ = path.parent_path();
  return cfg;
}

bool ConfigFile::has(const std::string& key) const { return values_.count(key) != 0; }

void ConfigFile::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  used_.erase(key);
}

std::string ConfigFile::raw(const std::string& key) const {
  used_.insert(key);
  return values_.at(key);
}

void ConfigFile::bad_value(const std::string& key, const std::string& expected) const {
  const auto it = lines_.find(key);
  const std::string where = it == lines_.end() ? origin_ : origin_ + ":" + std::to_string(it->second);
  throw UsageError(where + ": '" + key + "' must be " + expected + ", got '" + values_.at(key) + "'");
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

std::optional<std::string> ConfigFile::get_optional(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return raw(key);
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string v = raw(key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, "a number");
  return out;
}

long long ConfigFile::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const std::string v = raw(key);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, "an integer");
  return out;
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = raw(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, "an unsigned 64-bit integer");
  return out;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = raw(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, "a boolean");
}

std::vector<double> ConfigFile::get_doubles(const std::string& key, std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(raw(key))) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (ec != std::errc() || ptr != item.data() + item.size()) bad_value(key, "a comma-separated list of numbers");
    out.push_back(x);
  }
  return out;
}

std::vector<int> ConfigFile::get_ints(const std::string& key, std::vector<int> fallback) const {
  if (!has(key)) return fallback;
  std::vector<int> out;
  for (const auto& item : split_list(raw(key))) {
    int x = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (ec != std::errc() || ptr != item.data() + item.size()) bad_value(key, "a comma-separated list of integers");
    out.push_back(x);
  }
  return out;
}

std::filesystem::path ConfigFile::get_path(const std::string& key, const std::filesystem::path& fallback) const {
  if (!has(key)) return fallback;
  std::filesystem::path p = raw(key);
  if (p.is_relative() && !base_.empty()) p = base_ / p;
  return p;
}

std::vector<std::string> ConfigFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

void ConfigFile::require_all_used() const {
  const auto unused = unused_keys();
  if (unused.empty()) return;
  std::string msg = origin_ + ": unknown key";
  msg += unused.size() > 1 ? "s" : "";
  for (std::size_t i = 0; i < unused.size(); ++i) msg += (i ? ", '" : " '") + unused[i] + "'";
  throw UsageError(msg);
}

}  // namespace stct::config
