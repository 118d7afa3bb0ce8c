#include "iphase/sequences.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace iphase {

namespace {

using T_ = Transition;

void require_duration(double value, const char* what) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be a non-negative duration");
  }
}

StateVector launch_state(const Vec3& velocity) { return StateVector::at(Vec3::Zero(), velocity); }

InterferometerDefinition three_pulse(double T, const Vec3& k, const Vec3& velocity) {
  require_duration(T, "T");
  InterferometerDefinition d;
  d.pulses = {{0.0, k, PulseArea::HalfPi}, {T, k, PulseArea::Pi}, {2.0 * T, k, PulseArea::HalfPi}};
  d.upper = ArmRecipe::from_transitions({T_::Up, T_::Down, T_::None});
  d.lower = ArmRecipe::from_transitions({T_::None, T_::Up, T_::Down});
  d.initial_state = launch_state(velocity);
  d.detection_state = InternalState::Ground;
  d.validate();
  return d;
}

Transition flip(InternalState& state) {
  if (state == InternalState::Ground) {
    state = InternalState::Excited;
    return T_::Up;
  }
  state = InternalState::Ground;
  return T_::Down;
}

}  // namespace

double wavevector_from_wavelength(double wavelength) {
  if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be positive");
  return 2.0 * std::numbers::pi / wavelength;
}

InterferometerDefinition build_gravimeter(double T, double v_launch, double k) {
  return three_pulse(T, Vec3(0.0, 0.0, k), Vec3(0.0, 0.0, v_launch));
}

InterferometerDefinition build_gyroscope(double T, double v_y, double k) {
  return three_pulse(T, Vec3(k, 0.0, 0.0), Vec3(0.0, v_y, 0.0));
}

InterferometerDefinition build_clock(double T, double v_launch, double k) {
  require_duration(T, "T");
  const Vec3 up(0.0, 0.0, k);
  InterferometerDefinition d;
  d.pulses = {{0.0, up, PulseArea::HalfPi},
              {T, up, PulseArea::HalfPi},
              {T, -up, PulseArea::HalfPi},
              {2.0 * T, -up, PulseArea::HalfPi}};
  d.upper = ArmRecipe::from_transitions({T_::Up, T_::Down, T_::Up, T_::None});
  d.lower = ArmRecipe::from_transitions({T_::None, T_::None, T_::None, T_::Up});
  d.initial_state = launch_state(Vec3(0.0, 0.0, v_launch));
  d.detection_state = InternalState::Excited;
  d.validate();
  return d;
}

ConjugatePair build_recoil(double T, double T_rec, int N, double k, double v_launch) {
  require_duration(T, "T");
  if (!(T_rec > 0.0) || !std::isfinite(T_rec)) throw std::invalid_argument("T_rec must be positive");
  if (N < 1) throw std::invalid_argument("N must be at least 1");

  const Vec3 up(0.0, 0.0, k);
  std::vector<Pulse> pulses{{0.0, up, PulseArea::HalfPi}, {T, up, PulseArea::HalfPi}};
  double direction = -1.0;
  for (int j = 1; j < N; ++j) {
    pulses.push_back({T + j * T_rec, direction * up, PulseArea::Pi});
    direction = -direction;
  }
  const double t_close = T + N * T_rec;
  pulses.push_back({t_close, -up, PulseArea::HalfPi});
  pulses.push_back({t_close + T, -up, PulseArea::HalfPi});

  // An arm is fixed by whether it transitions at each of the four pi/2
  // pulses; pi pulses always flip the internal state.
  auto arm = [&](bool first, bool second, bool third, bool fourth) {
    std::vector<Transition> steps;
    InternalState state = InternalState::Ground;
    steps.push_back(first ? flip(state) : T_::None);
    steps.push_back(second ? flip(state) : T_::None);
    for (int j = 1; j < N; ++j) steps.push_back(flip(state));
    steps.push_back(third ? flip(state) : T_::None);
    steps.push_back(fourth ? flip(state) : T_::None);
    return std::pair{ArmRecipe::from_transitions(steps), state};
  };

  // The upper arm of each pair leads by hbar k T / m after the second pulse.
  // A -z pi/2 pulse slows atoms in |1> (UP) and speeds atoms in |2> (DOWN),
  // so the leading arm transitions first when the pair is in |1>.
  const bool n_even = (N % 2) == 0;
  auto make_pair = [&](bool upper_second, bool lower_second, bool pair_excited) {
    const bool lead_first = !pair_excited;
    auto [up_recipe, up_state] = arm(true, upper_second, lead_first, !lead_first);
    auto lo_recipe = arm(false, lower_second, !lead_first, lead_first).first;
    InterferometerDefinition d;
    d.pulses = pulses;
    d.upper = std::move(up_recipe);
    d.lower = std::move(lo_recipe);
    d.initial_state = launch_state(Vec3(0.0, 0.0, v_launch));
    d.detection_state = up_state;
    d.validate();
    return d;
  };

  ConjugatePair pair;
  // |2> after pulse 2: upper driven at pulse 1 only, lower at pulse 2 only.
  pair.first = make_pair(false, true, /*pair_excited=*/!n_even);
  // |1> after pulse 2: upper driven at both, lower at neither.
  pair.second = make_pair(true, false, /*pair_excited=*/n_even);
  return pair;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"gravimeter", "clock", "recoil", "gyroscope"};
  return names;
}

std::optional<PresetKind> parse_preset(std::string_view name) {
  if (name == "gravimeter") return PresetKind::Gravimeter;
  if (name == "clock") return PresetKind::Clock;
  if (name == "recoil") return PresetKind::Recoil;
  if (name == "gyroscope") return PresetKind::Gyroscope;
  return std::nullopt;
}

std::string_view to_string(PresetKind kind) {
  switch (kind) {
    case PresetKind::Gravimeter:
      return "gravimeter";
    case PresetKind::Clock:
      return "clock";
    case PresetKind::Recoil:
      return "recoil";
    case PresetKind::Gyroscope:
      return "gyroscope";
  }
  return "unknown";
}

ParameterMap default_parameters(PresetKind kind) {
  ParameterMap p{
      {"lambda_eff", 426e-9},  {"latitude_deg", 41.0},           {"earth_radius_m", 6.72e6},
      {"g_z", -9.8},           {"omega_rad_s", kTableRotationRate}, {"mass_kg", 2.21e-25},
  };
  switch (kind) {
    case PresetKind::Gravimeter:
    case PresetKind::Clock:
      p["T"] = 0.4;
      p["v_launch"] = 9.8 * 0.4;
      break;
    case PresetKind::Recoil:
      p["T"] = 0.13;
      p["T_rec"] = 1.0 / 3000.0;
      p["N"] = 31;
      p["v_launch"] = 0.0;
      break;
    case PresetKind::Gyroscope:
      p["T"] = 1.0 / 290.0;
      p["v_y"] = 290.0;
      break;
  }
  return p;
}

ConfigurationPreset make_preset(std::string_view name, const ParameterMap& overrides,
                                const std::optional<Mat3>& gradient_override) {
  const auto kind = parse_preset(name);
  if (!kind) throw std::invalid_argument("unknown preset '" + std::string(name) + "'");

  ParameterMap p = default_parameters(*kind);
  for (const auto& [key, value] : overrides) {
    if (!p.contains(key)) {
      throw std::invalid_argument("preset '" + std::string(name) + "' has no parameter '" + key +
                                  "'");
    }
    if (!std::isfinite(value)) throw std::invalid_argument("parameter '" + key + "' is not finite");
    p[key] = value;
  }
  if ((*kind == PresetKind::Gravimeter || *kind == PresetKind::Clock) &&
      !overrides.contains("v_launch")) {
    p["v_launch"] = -p["g_z"] * p["T"];
  }

  EnvironmentModel env = build_environment(degrees_to_radians(p["latitude_deg"]),
                                           p["earth_radius_m"], p["g_z"], p["omega_rad_s"]);
  if (gradient_override) env = env.with_gradient(*gradient_override);

  const double k = wavevector_from_wavelength(p["lambda_eff"]);
  ConfigurationPreset preset{*kind, std::string(name), p, env,
                             AtomSpecies(p["mass_kg"], "Cs"), {}};
  switch (*kind) {
    case PresetKind::Gravimeter:
      preset.definitions.push_back(build_gravimeter(p["T"], p["v_launch"], k));
      break;
    case PresetKind::Clock:
      preset.definitions.push_back(build_clock(p["T"], p["v_launch"], k));
      break;
    case PresetKind::Recoil: {
      const double n = p["N"];
      if (n != std::floor(n) || n < 1 || n > 100000) {
        throw std::invalid_argument("N must be a positive integer");
      }
      auto pair = build_recoil(p["T"], p["T_rec"], static_cast<int>(n), k, p["v_launch"]);
      preset.definitions.push_back(std::move(pair.first));
      preset.definitions.push_back(std::move(pair.second));
      break;
    }
    case PresetKind::Gyroscope:
      preset.definitions.push_back(build_gyroscope(p["T"], p["v_y"], k));
      break;
  }
  return preset;
}

ConfigurationPreset with_environment(ConfigurationPreset preset, const EnvironmentModel& env) {
  preset.environment = env;
  return preset;
}

PhaseBreakdown evaluate_preset(const ConfigurationPreset& preset, DynamicsMode trajectory_mode,
                               DynamicsMode action_mode, const EvaluationOptions& options) {
  PhaseBreakdown result = total_phase(preset.definitions.at(0), preset.environment, preset.species,
                                      trajectory_mode, action_mode, options);
  if (preset.definitions.size() == 2) {
    result = result - total_phase(preset.definitions[1], preset.environment, preset.species,
                                  trajectory_mode, action_mode, options);
  }
  return result;
}

}  // namespace iphase
