#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "copo/arm.hpp"

namespace copo {

/// Flat `key = value` configuration.
///
///   # comment
///   env = inventory
///   inventory.horizon = 10
///   synthetic.arms = -0.3, 0, 0.45      # comma-separated arms
///   inventory.arms = 2;4, 3;6           # ';' separates coordinates
///
/// Keys are unique; a repeated key is an error.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, const std::string& source = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<Arm> get_arms(const std::string& key, std::vector<Arm> fallback) const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace copo
