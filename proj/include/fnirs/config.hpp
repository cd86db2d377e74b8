#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fnirs/synthgen.hpp"
#include "fnirs/trainer.hpp"

namespace fnirs {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every setting reachable from a `key = value` config file.
struct CliConfig {
  SynthConfig synth;
  TrainConfig train;
  ModelSpec model;  // kind is chosen per run; widths and dropout come from here
  std::size_t window = kWindowLength;
  double overlap = kWindowOverlap;
  bool standardize = false;
  std::uint64_t seed = 7;
};

struct ConfigKeyInfo {
  std::string name;
  std::string help;
  std::string default_value;
};

/// Documented keys with their defaults, in file order.
std::vector<ConfigKeyInfo> config_keys();

/// Sets one key; unknown keys and malformed values raise ConfigError.
void apply_setting(CliConfig& cfg, std::string_view key, std::string_view value);

/// Parses `key = value` lines with `#` comments over the defaults.
CliConfig parse_config(std::string_view text, std::string_view origin = "<config>");
CliConfig load_config(const std::filesystem::path& path);

/// Full config in file syntax; parse_config(render_config(c)) reproduces c.
std::string render_config(const CliConfig& cfg);

/// Key reference for --help output.
std::string config_help();

}  // namespace fnirs
