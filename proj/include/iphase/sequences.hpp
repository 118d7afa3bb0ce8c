#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iphase/phases.hpp"

namespace iphase {

double wavevector_from_wavelength(double wavelength);

/// pi/2 - pi - pi/2 along +z at 0, T, 2T. Upper arm is kicked at the first
/// pulse (UP, DOWN, -), lower at the second (-, UP, DOWN); both detected in |1>.
InterferometerDefinition build_gravimeter(double T, double v_launch, double k);

/// Ramsey-Borde: pi/2 along +z at 0 and T, pi/2 along -z at T and 2T.
/// The closed pair (UP, DOWN, UP, -) / (-, -, -, UP) is detected in |2>.
InterferometerDefinition build_clock(double T, double v_launch, double k);

struct ConjugatePair {
  InterferometerDefinition first;
  InterferometerDefinition second;
};

/// Ramsey-Borde with N-1 pi pulses at T + j T_rec (j = 1..N-1), the first
/// along -z and alternating after that, closed by a -z pi/2 pair at
/// T + N T_rec and 2T + N T_rec.
///
/// `first` is the pair that sits in |2> after the second pulse, `second` the
/// pair in |1>. In each pair the upper arm is the one driven by the first
/// pulse; the closing transition order is fixed by requiring the two arms to
/// meet at the last pulse. The observable is phi(first) - phi(second).
ConjugatePair build_recoil(double T, double T_rec, int N, double k, double v_launch = 0.0);

/// pi/2 - pi - pi/2 with k along +x (west to east), atoms moving along +y.
InterferometerDefinition build_gyroscope(double T, double v_y, double k);

enum class PresetKind { Gravimeter, Clock, Recoil, Gyroscope };

using ParameterMap = std::map<std::string, double>;

struct ConfigurationPreset {
  PresetKind kind;
  std::string name;
  ParameterMap parameters;
  EnvironmentModel environment;
  AtomSpecies species;
  std::vector<InterferometerDefinition> definitions;  // two for recoil
};

const std::vector<std::string>& preset_names();
std::optional<PresetKind> parse_preset(std::string_view name);
std::string_view to_string(PresetKind kind);

/// Defaults: the published parameter set. Keys shared by every preset:
/// lambda_eff, latitude_deg, earth_radius_m, g_z, omega_rad_s, mass_kg.
ParameterMap default_parameters(PresetKind kind);

/// Applies overrides on top of the defaults. Throws std::invalid_argument for
/// an unknown preset or a key the preset does not have. For gravimeter and
/// clock, v_launch follows -g_z T unless set explicitly.
ConfigurationPreset make_preset(std::string_view name, const ParameterMap& overrides = {},
                                const std::optional<Mat3>& gradient_override = std::nullopt);

/// Same preset with a different environment (for zeroing-sensitivity runs).
ConfigurationPreset with_environment(ConfigurationPreset preset, const EnvironmentModel& env);

/// Total phase of the preset; for recoil the conjugate difference.
PhaseBreakdown evaluate_preset(const ConfigurationPreset& preset, DynamicsMode trajectory_mode,
                               DynamicsMode action_mode, const EvaluationOptions& options = {});

}  // namespace iphase
