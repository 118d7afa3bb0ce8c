#pragma once

#include <string_view>
#include <vector>

#include "iphase/geomodel.hpp"
#include "iphase/linodyn.hpp"

namespace iphase {

enum class PulseArea { HalfPi, Pi };

struct Pulse {
  double epoch = 0.0;
  Vec3 k_vector = Vec3::Zero();  // effective wavevector, rad/m
  PulseArea area = PulseArea::HalfPi;
};

enum class Transition { None, Up, Down };
enum class InternalState { Ground = 1, Excited = 2 };

/// One arm's response to one pulse. kick is the momentum change in units of
/// hbar k along the pulse's k_vector; UP absorbs (+1), DOWN emits (-1).
struct RecipeStep {
  int kick = 0;
  Transition transition = Transition::None;
};

struct ArmRecipe {
  std::vector<RecipeStep> steps;

  /// Kicks follow from the transitions.
  static ArmRecipe from_transitions(std::initializer_list<Transition> transitions);
  static ArmRecipe from_transitions(const std::vector<Transition>& transitions);

  /// Throws std::invalid_argument if a step's kick disagrees with its
  /// transition or the internal-state sequence starting in |1> is illegal.
  /// Returns the final internal state.
  InternalState validate() const;
};

struct InterferometerDefinition {
  std::vector<Pulse> pulses;
  ArmRecipe upper;
  ArmRecipe lower;
  StateVector initial_state;
  InternalState detection_state = InternalState::Ground;

  /// Throws std::invalid_argument on length mismatch, decreasing epochs,
  /// a pi pulse that leaves an arm untouched, an initial epoch after the
  /// first pulse, or arms ending outside the detection state.
  void validate() const;
};

enum class Arm { Upper, Lower };

/// Propagates one arm under `mode` dynamics, applying the recipe's velocity
/// kicks (kick hbar/m) k_vector instantaneously at each pulse epoch.
ArmTrajectory run_arm(const InterferometerDefinition& defn, Arm which, const EnvironmentModel& env,
                      const AtomSpecies& species, DynamicsMode mode,
                      const PhysicalConstants& constants = {});

/// Sum over pulses of s k.r(t_p), s = +1 for UP, -1 for DOWN; upper minus lower.
Real laser_phase(const InterferometerDefinition& defn, const ArmTrajectory& upper,
                   const ArmTrajectory& lower);

/// p.(r_lower - r_upper)/hbar at the final pulse, p the two-arm mean of the
/// canonical momentum just after the final pulse.
Real separation_phase(const ArmTrajectory& upper, const ArmTrajectory& lower,
                        const QuadraticLagrangian& lagrangian,
                        const PhysicalConstants& constants = {});

struct PhaseBreakdown {
  double prop = 0.0;
  double laser = 0.0;
  double sep = 0.0;
  double total = 0.0;
  DynamicsMode trajectory_mode = DynamicsMode::Full;
  DynamicsMode action_mode = DynamicsMode::Full;
};

/// Component-wise difference; total re-assembled from the components.
PhaseBreakdown operator-(const PhaseBreakdown& a, const PhaseBreakdown& b);

struct EvaluationOptions {
  int quadrature_nodes = kDefaultQuadratureNodes;
  PhysicalConstants constants;
};

/// Trajectories under `trajectory_mode`, action under `action_mode`. Throws
/// std::invalid_argument if action_mode drops a term trajectory_mode keeps.
PhaseBreakdown total_phase(const InterferometerDefinition& defn, const EnvironmentModel& env,
                           const AtomSpecies& species, DynamicsMode trajectory_mode,
                           DynamicsMode action_mode, const EvaluationOptions& options = {});

/// Same definition with k -> -k on every pulse.
InterferometerDefinition reverse_wavevectors(const InterferometerDefinition& defn);

struct ParityParts {
  double odd = 0.0;
  double even = 0.0;
  double forward = 0.0;   // phi(k)
  double reversed = 0.0;  // phi(-k)
};

/// even = (phi(k) + phi(-k))/2 and odd = phi(k) - even, each within a few ulps
/// of the ideal, chosen so that odd + even == forward holds exactly in double.
ParityParts parity_decompose(const InterferometerDefinition& defn, const EnvironmentModel& env,
                             const AtomSpecies& species, DynamicsMode trajectory_mode,
                             DynamicsMode action_mode, const EvaluationOptions& options = {});

}  // namespace iphase
