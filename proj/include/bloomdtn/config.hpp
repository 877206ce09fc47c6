#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bloomdtn/scenario.hpp"

namespace bloomdtn {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Ordered key/value pairs; later entries override earlier ones.
using Settings = std::vector<std::pair<std::string, std::string>>;

/// Reads `key = value` lines. Blank lines and `#` comments are skipped.
Settings read_settings(std::istream& in);
Settings read_settings(const std::filesystem::path& file);

/// Splits a single `key=value` override.
std::pair<std::string, std::string> split_setting(const std::string& text);

/// Applies settings on top of `base`, then validates. When strategy.window_n
/// is not given the window follows the strategy's default for the final
/// kind and buffer size.
ScenarioConfig apply_settings(ScenarioConfig base, const Settings& settings);

/// apply_settings over the default scenario.
ScenarioConfig parse_config(const std::filesystem::path& file);

/// Every recognised key, in schema order.
const std::vector<std::string>& config_keys();

}  // namespace bloomdtn
