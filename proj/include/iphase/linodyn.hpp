#pragma once

#include <vector>

#include <Eigen/Core>

#include "iphase/geomodel.hpp"
#include "iphase/numerics.hpp"

namespace iphase {

using Vec3r = Eigen::Matrix<Real, 3, 1>;
using Mat3r = Eigen::Matrix<Real, 3, 3>;
using State6 = Eigen::Matrix<Real, 6, 1>;
using Mat6 = Eigen::Matrix<Real, 6, 6>;
using Mat7 = Eigen::Matrix<Real, 7, 7>;

inline Vec3r extend(const Vec3& v) { return v.cast<Real>(); }

struct StateVector {
  Vec3r position = Vec3r::Zero();
  Vec3r velocity = Vec3r::Zero();
  Real epoch = 0;

  static StateVector at(const Vec3& position, const Vec3& velocity, double epoch = 0.0);
  State6 packed() const;
  static StateVector from_packed(const State6& x, Real epoch);
};

/// dx/dt = drift x + forcing for x = (r, v). Every Lagrangian handled here is
/// at most quadratic in (r, v), so this is exact.
struct LinearSystem {
  Mat6 drift = Mat6::Zero();
  State6 forcing = State6::Zero();

  State6 derivative(const State6& x) const { return drift * x + forcing; }
  Vec3r acceleration(const StateVector& s) const { return derivative(s.packed()).tail<3>(); }
};

/// a(r, v) = g + T r - 2 Omega x v - Omega x (Omega x (r + R)).
LinearSystem assemble_system(const EnvironmentModel& env, const AtomSpecies& species);

/// exp of the augmented generator [[A, b], [0, 0]] dt; the upper-right column
/// is phi_1(A dt) b dt. Scaling and squaring with a Taylor core. Throws
/// std::runtime_error if the series fails to converge (non-finite input).
Mat7 transition_matrix(const LinearSystem& system, Real dt);

StateVector propagate(const LinearSystem& system, const StateVector& start, Real dt);

struct Segment {
  StateVector start;
  Real duration = 0;
};

StateVector propagate(const LinearSystem& system, const Segment& segment);

/// Piecewise free propagation between pulses. arrivals[i] is the state at
/// pulse i just before its kick, states_at_pulses[i] just after, and
/// kicks[i] the velocity change between them.
struct ArmTrajectory {
  LinearSystem system;
  std::vector<Segment> segments;
  std::vector<StateVector> arrivals;
  std::vector<StateVector> states_at_pulses;
  std::vector<Vec3r> kicks;

  StateVector sample(std::size_t segment, Real offset) const;
  const StateVector& initial() const;
  const StateVector& final() const;
};

/// upper - lower, propagated on its own. The forcing cancels from the
/// difference, so it follows the homogeneous system and picks up only the
/// kick differences; subtracting two separately propagated arms would lose
/// the digits the arms share (a 290 m/s common velocity, say).
struct ArmDifference {
  Mat6 drift = Mat6::Zero();
  std::vector<State6> starts;   // per segment
  std::vector<Real> durations;  // per segment
  State6 final = State6::Zero();  // after the last kick

  State6 sample(std::size_t segment, Real offset) const;
};

/// Throws std::invalid_argument unless both arms share their dynamics,
/// segment epochs and durations.
ArmDifference arm_difference(const ArmTrajectory& upper, const ArmTrajectory& lower);

/// L(r, v) = m (v^2/2 + f.r + r.K r/2 + Omega.(r x v) + u.v) with
/// K = T + |Omega|^2 I - Omega Omega^T, f = g - Omega x (Omega x R), u = Omega x R.
/// This is the Earth-frame Lagrangian with its constant m|Omega x R|^2/2
/// dropped. The u.v term is a total derivative and is integrated in closed
/// form from the endpoints.
class QuadraticLagrangian {
 public:
  QuadraticLagrangian(const EnvironmentModel& env, const AtomSpecies& species);

  Real mass() const { return mass_; }
  const Mat3r& stiffness() const { return stiffness_; }
  const Vec3r& force() const { return force_; }
  const Vec3r& omega() const { return omega_; }
  const Vec3r& frame_velocity() const { return frame_velocity_; }

  /// L / m without the u.v term.
  Real specific_density(const StateVector& s) const;

  /// L / m including the u.v term; the full value up to the dropped constant.
  Real specific_lagrangian(const StateVector& s) const;

  /// dL/dv = m (v + Omega x r + u).
  Vec3r canonical_momentum(const StateVector& s) const;

 private:
  Real mass_;
  Mat3r stiffness_;
  Vec3r force_;
  Vec3r omega_;
  Vec3r frame_velocity_;
};

inline constexpr int kDefaultQuadratureNodes = 40;

/// S = integral of L along the trajectory (J s), Gauss-Legendre per segment
/// with compensated accumulation.
Real action_integral(const ArmTrajectory& trajectory, const QuadraticLagrangian& lagrangian,
                     int nodes = kDefaultQuadratureNodes);
Real action_integral(const ArmTrajectory& trajectory, const EnvironmentModel& env,
                     const AtomSpecies& species, int nodes = kDefaultQuadratureNodes);

/// S(upper) - S(lower) (J s) from the node-wise bilinear form in the arm
/// difference and sum, so the two large actions never meet. Throws
/// std::invalid_argument unless both arms share dynamics, segment epochs and
/// durations.
Real action_difference(const ArmTrajectory& upper, const ArmTrajectory& lower,
                       const QuadraticLagrangian& lagrangian, int nodes = kDefaultQuadratureNodes);
Real action_difference(const ArmTrajectory& upper, const ArmTrajectory& lower,
                       const EnvironmentModel& env, const AtomSpecies& species,
                       int nodes = kDefaultQuadratureNodes);

}  // namespace iphase
