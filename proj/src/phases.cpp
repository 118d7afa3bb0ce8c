#include "iphase/phases.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace iphase {

using numerics::CompensatedSum;
using numerics::ExtendedSum;

namespace {

int kick_for(Transition t) {
  switch (t) {
    case Transition::Up:
      return 1;
    case Transition::Down:
      return -1;
    case Transition::None:
      return 0;
  }
  return 0;
}

int laser_sign(Transition t) { return kick_for(t); }

}  // namespace

ArmRecipe ArmRecipe::from_transitions(std::initializer_list<Transition> transitions) {
  return from_transitions(std::vector<Transition>(transitions));
}

ArmRecipe ArmRecipe::from_transitions(const std::vector<Transition>& transitions) {
  ArmRecipe recipe;
  recipe.steps.reserve(transitions.size());
  for (Transition t : transitions) recipe.steps.push_back({kick_for(t), t});
  return recipe;
}

InternalState ArmRecipe::validate() const {
  InternalState state = InternalState::Ground;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const RecipeStep& step = steps[i];
    if (step.kick != kick_for(step.transition)) {
      throw std::invalid_argument("ArmRecipe: kick at step " + std::to_string(i) +
                                  " does not match its transition");
    }
    if (step.transition == Transition::Up) {
      if (state != InternalState::Ground) {
        throw std::invalid_argument("ArmRecipe: UP from |2> at step " + std::to_string(i));
      }
      state = InternalState::Excited;
    } else if (step.transition == Transition::Down) {
      if (state != InternalState::Excited) {
        throw std::invalid_argument("ArmRecipe: DOWN from |1> at step " + std::to_string(i));
      }
      state = InternalState::Ground;
    }
  }
  return state;
}

void InterferometerDefinition::validate() const {
  if (upper.steps.size() != pulses.size() || lower.steps.size() != pulses.size()) {
    throw std::invalid_argument("InterferometerDefinition: recipe/pulse length mismatch");
  }
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    if (!std::isfinite(pulses[i].epoch) || !pulses[i].k_vector.allFinite()) {
      throw std::invalid_argument("InterferometerDefinition: non-finite pulse");
    }
    if (i > 0 && pulses[i].epoch < pulses[i - 1].epoch) {
      throw std::invalid_argument("InterferometerDefinition: pulse epochs must not decrease");
    }
    if (pulses[i].area == PulseArea::Pi && (upper.steps[i].transition == Transition::None ||
                                             lower.steps[i].transition == Transition::None)) {
      throw std::invalid_argument("InterferometerDefinition: pi pulse " + std::to_string(i) +
                                  " must drive a transition on both arms");
    }
  }
  if (!pulses.empty() && initial_state.epoch > pulses.front().epoch) {
    throw std::invalid_argument("InterferometerDefinition: initial state after first pulse");
  }
  const InternalState upper_final = upper.validate();
  const InternalState lower_final = lower.validate();
  if (upper_final != detection_state || lower_final != detection_state) {
    throw std::invalid_argument("InterferometerDefinition: arms do not end in the detection state");
  }
}

ArmTrajectory run_arm(const InterferometerDefinition& defn, Arm which, const EnvironmentModel& env,
                      const AtomSpecies& species, DynamicsMode mode,
                      const PhysicalConstants& constants) {
  defn.validate();
  const ArmRecipe& recipe = which == Arm::Upper ? defn.upper : defn.lower;
  ArmTrajectory traj;
  traj.system = assemble_system(degrade_environment(env, mode), species);
  traj.segments.reserve(defn.pulses.size());
  traj.arrivals.reserve(defn.pulses.size());
  traj.states_at_pulses.reserve(defn.pulses.size());
  traj.kicks.reserve(defn.pulses.size());

  const Real recoil_per_k = static_cast<Real>(constants.hbar) / species.mass();
  StateVector state = defn.initial_state;
  for (std::size_t i = 0; i < defn.pulses.size(); ++i) {
    const Pulse& pulse = defn.pulses[i];
    const Segment segment{state, pulse.epoch - state.epoch};
    traj.segments.push_back(segment);
    state = propagate(traj.system, segment);
    state.epoch = pulse.epoch;
    traj.arrivals.push_back(state);
    const Vec3r kick = (recipe.steps[i].kick * recoil_per_k) * extend(pulse.k_vector);
    state.velocity += kick;
    traj.kicks.push_back(kick);
    traj.states_at_pulses.push_back(state);
  }
  return traj;
}

Real laser_phase(const InterferometerDefinition& defn, const ArmTrajectory& upper,
                   const ArmTrajectory& lower) {
  const std::size_t n = defn.pulses.size();
  if (upper.arrivals.size() != n || lower.arrivals.size() != n) {
    throw std::invalid_argument("laser_phase: trajectories not sampled at every pulse");
  }
  ExtendedSum sum;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3r k = extend(defn.pulses[i].k_vector);
    const int su = laser_sign(defn.upper.steps[i].transition);
    const int sl = laser_sign(defn.lower.steps[i].transition);
    if (su != 0) sum.add(su * k.dot(upper.arrivals[i].position));
    if (sl != 0) sum.add(-sl * k.dot(lower.arrivals[i].position));
  }
  return sum.value();
}

Real separation_phase(const ArmTrajectory& upper, const ArmTrajectory& lower,
                        const QuadraticLagrangian& lagrangian, const PhysicalConstants& constants) {
  if (upper.states_at_pulses.empty() || lower.states_at_pulses.empty()) return 0;
  const StateVector& eu = upper.final();
  const StateVector& el = lower.final();
  const Vec3r mean_momentum =
      (lagrangian.canonical_momentum(eu) + lagrangian.canonical_momentum(el)) / 2;
  const Vec3r separation = -arm_difference(upper, lower).final.head<3>();
  return mean_momentum.dot(separation) / static_cast<Real>(constants.hbar);
}

PhaseBreakdown operator-(const PhaseBreakdown& a, const PhaseBreakdown& b) {
  PhaseBreakdown d;
  d.prop = a.prop - b.prop;
  d.laser = a.laser - b.laser;
  d.sep = a.sep - b.sep;
  CompensatedSum total;
  total.add(d.prop);
  total.add(d.laser);
  total.add(d.sep);
  d.total = total.value();
  d.trajectory_mode = a.trajectory_mode;
  d.action_mode = a.action_mode;
  return d;
}

PhaseBreakdown total_phase(const InterferometerDefinition& defn, const EnvironmentModel& env,
                           const AtomSpecies& species, DynamicsMode trajectory_mode,
                           DynamicsMode action_mode, const EvaluationOptions& options) {
  if (!includes(action_mode, trajectory_mode)) {
    throw std::invalid_argument("total_phase: action mode '" + std::string(to_string(action_mode)) +
                                "' drops terms of trajectory mode '" +
                                std::string(to_string(trajectory_mode)) + "'");
  }
  PhaseBreakdown out;
  out.trajectory_mode = trajectory_mode;
  out.action_mode = action_mode;
  if (defn.pulses.empty()) {
    defn.validate();
    return out;
  }

  const ArmTrajectory upper =
      run_arm(defn, Arm::Upper, env, species, trajectory_mode, options.constants);
  const ArmTrajectory lower =
      run_arm(defn, Arm::Lower, env, species, trajectory_mode, options.constants);
  const QuadraticLagrangian lagrangian(degrade_environment(env, action_mode), species);

  const Real prop = action_difference(upper, lower, lagrangian, options.quadrature_nodes) /
                   static_cast<Real>(options.constants.hbar);
  const Real laser = laser_phase(defn, upper, lower);
  const Real sep = separation_phase(upper, lower, lagrangian, options.constants);
  ExtendedSum total;
  total.add(prop);
  total.add(laser);
  total.add(sep);
  out.prop = static_cast<double>(prop);
  out.laser = static_cast<double>(laser);
  out.sep = static_cast<double>(sep);
  out.total = static_cast<double>(total.value());
  return out;
}

InterferometerDefinition reverse_wavevectors(const InterferometerDefinition& defn) {
  InterferometerDefinition reversed = defn;
  for (Pulse& p : reversed.pulses) p.k_vector = -p.k_vector;
  return reversed;
}

ParityParts parity_decompose(const InterferometerDefinition& defn, const EnvironmentModel& env,
                             const AtomSpecies& species, DynamicsMode trajectory_mode,
                             DynamicsMode action_mode, const EvaluationOptions& options) {
  ParityParts parts;
  parts.forward = total_phase(defn, env, species, trajectory_mode, action_mode, options).total;
  parts.reversed =
      total_phase(reverse_wavevectors(defn), env, species, trajectory_mode, action_mode, options)
          .total;
  const double even = 0.5 * (parts.forward + parts.reversed);
  // forward - even can round so that no odd re-adds to forward (a tie skips
  // it). Moving even by a few of its own ulps breaks the tie.
  double up = even;
  double down = even;
  for (int i = 0; i < 16; ++i) {
    const double candidate = i % 2 == 0 ? up : down;
    const double base = parts.forward - candidate;
    for (double odd : {base, std::nextafter(base, HUGE_VAL), std::nextafter(base, -HUGE_VAL)}) {
      if (odd + candidate == parts.forward) {
        parts.even = candidate;
        parts.odd = odd;
        return parts;
      }
    }
    if (i % 2 == 0) {
      up = std::nextafter(up, HUGE_VAL);
    } else {
      down = std::nextafter(down, -HUGE_VAL);
    }
  }
  parts.even = even;
  parts.odd = parts.forward - even;
  return parts;
}

}  // namespace iphase
