#pragma once

// Reference computations for the test suites. Nothing here calls into the
// engine's propagation or quadrature: the dynamics come from the vector form
// of the acceleration, the action from the rotating-frame Lagrangian as
// written, and all arithmetic is long double.

#include <array>
#include <vector>

#include <Eigen/Core>

#include "iphase/phases.hpp"

namespace oracle {

using LD = long double;
using V3 = Eigen::Matrix<LD, 3, 1>;
using State = std::array<LD, 6>;

V3 widen(const iphase::Vec3& v);

/// g + T r - 2 Omega x v - Omega x (Omega x (r + R)).
V3 acceleration(const iphase::EnvironmentModel& env, const V3& r, const V3& v);

/// Adaptive Runge-Kutta-Fehlberg 7(8).
State rk_propagate(const iphase::EnvironmentModel& env, const State& x0, LD dt);

State pack(const V3& r, const V3& v);
V3 position(const State& x);
V3 velocity(const State& x);

/// States just before each pulse of one arm, propagated with rk_propagate and
/// kicked by hbar k / m at each UP (+) or DOWN (-) transition.
std::vector<State> rk_arm(const iphase::InterferometerDefinition& defn, iphase::Arm which,
                          const iphase::EnvironmentModel& env, LD hbar_over_m);

/// m (|v + Omega x (r + R)|^2 / 2 + g.r + r.T r / 2) - m |Omega x R|^2 / 2.
LD lagrangian(const iphase::EnvironmentModel& env, LD mass, const V3& r, const V3& v);

/// Composite Simpson over each segment of `traj` with `steps` panels, states
/// stepped by a one-step transition matrix from Eigen's matrix exponential.
LD simpson_action(const iphase::ArmTrajectory& traj, const iphase::EnvironmentModel& env,
                  LD mass, int steps = 1000000);

/// |a - b| / |b| for vectors, with b != 0.
LD relative(const V3& a, const V3& b);

}  // namespace oracle
