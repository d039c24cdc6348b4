#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "docenh/augment.hpp"
#include "docenh/enhance.hpp"
#include "docenh/harness.hpp"
#include "docenh/iqa.hpp"

namespace docenh {

/// Settings shared by the command-line tools. Loaded from a JSON file:
///
///   {
///     "tone":    {"black_point": 0.05, "white_point": 0.92, "gamma": 1.0},
///     "augment": {"crop_size": 256, "threshold": 1e6, "crops_per_page": 8},
///     "metrics": [{"id": "pie", "label": "PIE", "polarity": "lower",
///                  "command": "pie-score {ref} {test}", "timeout_ms": 60000}],
///     "engines": [{"id": "unet", "command": "unet-run {in} {out}", "timeout_ms": 600000}],
///     "jobs": 8, "process_cap": 4, "seed": 7
///   }
///
/// Every key is optional. An engine without a command only reuses the
/// manifest's enhanced paths.
struct Config {
  ToneParams tone;
  AugmentConfig augment;
  std::vector<MetricDescriptor> metrics;  // external scorers
  std::vector<EngineDescriptor> engines;  // external or precomputed engines
  std::optional<int> jobs;
  int process_cap = 4;
  std::uint64_t seed = 0;

  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kConfigEnv = "DOCENH_CONFIG";

Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);
/// The explicit path if given, else $DOCENH_CONFIG, else defaults.
Config resolve_config(const std::optional<std::filesystem::path>& explicit_path);

/// Builtin metrics plus the configured external ones.
MetricRegistry metric_registry(const Config& config);

}  // namespace docenh
