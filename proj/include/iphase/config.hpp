#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iphase/sequences.hpp"

namespace iphase {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a number with an optional unit suffix and converts it to the unit
/// the parameter `key` is stored in (SI, except latitude_deg in degrees).
/// Accepts "426 nm", "0.4s", "1/3000 s", "41 deg", "3.92 m/s". Throws
/// ConfigError for an unknown unit or one of the wrong kind for the key.
double parse_quantity(std::string_view key, std::string_view text);

/// "KEY=VALUE", with VALUE parsed by parse_quantity.
std::pair<std::string, double> parse_assignment(std::string_view text);

struct SweepAxis {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int count = 0;

  /// count evenly spaced values from start to stop inclusive.
  std::vector<double> values() const;
};

/// "NAME=START:STOP:COUNT". Throws ConfigError if malformed or COUNT < 1.
SweepAxis parse_axis(std::string_view text);

struct ModeSelection {
  DynamicsMode trajectory = DynamicsMode::Full;
  DynamicsMode action = DynamicsMode::Full;
};

/// "TRAJ" (action follows the trajectory mode) or "TRAJ,ACTION".
ModeSelection parse_modes(std::string_view text);

struct RunConfig {
  std::optional<std::string> preset;
  ParameterMap parameters;  // sequence and environment overrides
  std::optional<Mat3> gradient;
  std::optional<DynamicsMode> trajectory_mode;
  std::optional<DynamicsMode> action_mode;
  std::optional<int> nodes;
  std::optional<double> target;
  std::optional<std::string> format;
  std::optional<std::string> out;
  std::optional<std::string> tolerance;
  std::vector<SweepAxis> axes;
};

/// Sections [environment], [sequence], [evaluation], [output], [sweep].
/// Unknown sections or keys and duplicate keys are rejected.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace iphase
