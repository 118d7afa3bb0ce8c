#include "iphase/linodyn.hpp"

#include <cmath>
#include <stdexcept>

namespace iphase {

using numerics::ExtendedSum;

StateVector StateVector::at(const Vec3& position, const Vec3& velocity, double epoch) {
  return StateVector{extend(position), extend(velocity), epoch};
}

State6 StateVector::packed() const {
  State6 x;
  x << position, velocity;
  return x;
}

StateVector StateVector::from_packed(const State6& x, Real epoch) {
  return StateVector{x.head<3>(), x.tail<3>(), epoch};
}

namespace {

Mat3r cross_matrix(const Vec3r& w) {
  Mat3r m;
  m << 0, -w.z(), w.y(),  //
      w.z(), 0, -w.x(),   //
      -w.y(), w.x(), 0;
  return m;
}

// (|w|^2 I - w w^T) r == -w x (w x r)
Mat3r centrifugal_matrix(const Vec3r& w) {
  return w.squaredNorm() * Mat3r::Identity() - w * w.transpose();
}

Real one_norm(const Mat7& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

constexpr int kMaxTaylorTerms = 40;
constexpr Real kScaledNormBound = 0.5L;
constexpr Real kTaylorTolerance = 1e-21L;

}  // namespace

LinearSystem assemble_system(const EnvironmentModel& env, const AtomSpecies& /*species*/) {
  // The mass cancels from the Euler-Lagrange equations.
  LinearSystem sys;
  const Vec3r w = extend(env.omega());
  sys.drift.topRightCorner<3, 3>() = Mat3r::Identity();
  sys.drift.bottomLeftCorner<3, 3>() = env.gradient().cast<Real>() + centrifugal_matrix(w);
  sys.drift.bottomRightCorner<3, 3>() = -2 * cross_matrix(w);
  sys.forcing.tail<3>() = extend(env.gravity()) - w.cross(w.cross(extend(env.earth_offset())));
  return sys;
}

Mat7 transition_matrix(const LinearSystem& system, Real dt) {
  Mat7 generator = Mat7::Zero();
  generator.topLeftCorner<6, 6>() = system.drift * dt;
  generator.topRightCorner<6, 1>() = system.forcing * dt;
  if (!generator.allFinite()) {
    throw std::runtime_error("transition_matrix: non-finite generator");
  }

  const Real norm = one_norm(generator);
  int squarings = 0;
  if (norm > kScaledNormBound) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kScaledNormBound)));
  }
  const Mat7 scaled = generator * std::ldexp(Real(1), -squarings);

  Mat7 result = Mat7::Identity();
  Mat7 term = Mat7::Identity();
  bool converged = false;
  for (int j = 1; j <= kMaxTaylorTerms; ++j) {
    term = (term * scaled) / static_cast<Real>(j);
    result += term;
    if (one_norm(term) <= kTaylorTolerance * one_norm(result)) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("transition_matrix: Taylor series did not converge");

  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

namespace {

StateVector apply(const Mat7& phi, const StateVector& start, Real dt) {
  const State6 x1 = phi.topLeftCorner<6, 6>() * start.packed() + phi.topRightCorner<6, 1>();
  return StateVector::from_packed(x1, start.epoch + dt);
}

}  // namespace

StateVector propagate(const LinearSystem& system, const StateVector& start, Real dt) {
  if (!std::isfinite(dt)) throw std::invalid_argument("propagate: non-finite duration");
  if (dt == 0) return start;
  return apply(transition_matrix(system, dt), start, dt);
}

StateVector propagate(const LinearSystem& system, const Segment& segment) {
  return propagate(system, segment.start, segment.duration);
}

StateVector ArmTrajectory::sample(std::size_t segment, Real offset) const {
  return propagate(system, segments.at(segment).start, offset);
}

const StateVector& ArmTrajectory::initial() const {
  if (!segments.empty()) return segments.front().start;
  return states_at_pulses.at(0);
}

const StateVector& ArmTrajectory::final() const {
  return states_at_pulses.at(states_at_pulses.size() - 1);
}

State6 ArmDifference::sample(std::size_t segment, Real offset) const {
  const State6& start = starts.at(segment);
  if (offset == 0) return start;
  const Mat7 phi = transition_matrix(LinearSystem{drift, State6::Zero()}, offset);
  return phi.topLeftCorner<6, 6>() * start;
}

ArmDifference arm_difference(const ArmTrajectory& upper, const ArmTrajectory& lower) {
  const std::size_t n = upper.segments.size();
  if (lower.segments.size() != n) {
    throw std::invalid_argument("arm_difference: arms have different segment counts");
  }
  if (upper.system.drift != lower.system.drift || upper.system.forcing != lower.system.forcing) {
    throw std::invalid_argument("arm_difference: arms follow different dynamics");
  }
  if (upper.kicks.size() != n || lower.kicks.size() != n) {
    throw std::invalid_argument("arm_difference: kicks not recorded at every pulse");
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (upper.segments[s].start.epoch != lower.segments[s].start.epoch ||
        upper.segments[s].duration != lower.segments[s].duration) {
      throw std::invalid_argument("arm_difference: arms do not share pulse epochs");
    }
  }

  ArmDifference d;
  d.drift = upper.system.drift;
  if (n == 0) return d;
  State6 x = upper.segments[0].start.packed() - lower.segments[0].start.packed();
  for (std::size_t s = 0; s < n; ++s) {
    d.starts.push_back(x);
    d.durations.push_back(upper.segments[s].duration);
    x = d.sample(s, upper.segments[s].duration);
    x.tail<3>() += upper.kicks[s] - lower.kicks[s];
  }
  d.final = x;
  return d;
}

QuadraticLagrangian::QuadraticLagrangian(const EnvironmentModel& env, const AtomSpecies& species)
    : mass_(species.mass()),
      stiffness_(env.gradient().cast<Real>() + centrifugal_matrix(extend(env.omega()))),
      omega_(extend(env.omega())) {
  const Vec3r offset = extend(env.earth_offset());
  force_ = extend(env.gravity()) - omega_.cross(omega_.cross(offset));
  frame_velocity_ = omega_.cross(offset);
}

Real QuadraticLagrangian::specific_density(const StateVector& s) const {
  const Vec3r& r = s.position;
  const Vec3r& v = s.velocity;
  return v.squaredNorm() / 2 + force_.dot(r) + r.dot(stiffness_ * r) / 2 + omega_.dot(r.cross(v));
}

Real QuadraticLagrangian::specific_lagrangian(const StateVector& s) const {
  return specific_density(s) + frame_velocity_.dot(s.velocity);
}

Vec3r QuadraticLagrangian::canonical_momentum(const StateVector& s) const {
  return mass_ * (s.velocity + omega_.cross(s.position) + frame_velocity_);
}

Real action_integral(const ArmTrajectory& trajectory, const QuadraticLagrangian& lagrangian,
                     int nodes) {
  if (trajectory.segments.empty()) return 0;
  const auto rule = numerics::gauss_legendre(nodes);
  ExtendedSum specific_action;
  for (std::size_t s = 0; s < trajectory.segments.size(); ++s) {
    const Segment& seg = trajectory.segments[s];
    if (seg.duration == 0) continue;
    const Real half = seg.duration / 2;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const StateVector x = trajectory.sample(s, half * (rule.nodes[i] + 1));
      specific_action.add(lagrangian.specific_density(x) * (rule.weights[i] * half));
    }
  }
  const Vec3r displacement = trajectory.final().position - trajectory.initial().position;
  specific_action.add(lagrangian.frame_velocity().dot(displacement));
  return specific_action.value() * lagrangian.mass();
}

Real action_integral(const ArmTrajectory& trajectory, const EnvironmentModel& env,
                     const AtomSpecies& species, int nodes) {
  return action_integral(trajectory, QuadraticLagrangian(env, species), nodes);
}

Real action_difference(const ArmTrajectory& upper, const ArmTrajectory& lower,
                       const QuadraticLagrangian& lagrangian, int nodes) {
  const ArmDifference diff = arm_difference(upper, lower);
  if (upper.segments.empty()) return 0;

  const auto rule = numerics::gauss_legendre(nodes);
  const Mat3r& stiffness = lagrangian.stiffness();
  const Vec3r& force = lagrangian.force();
  const Vec3r& omega = lagrangian.omega();

  ExtendedSum sum;
  for (std::size_t s = 0; s < upper.segments.size(); ++s) {
    const Real duration = upper.segments[s].duration;
    if (duration == 0) continue;
    const Real half = duration / 2;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Real offset = half * (rule.nodes[i] + 1);
      // Both arms and their difference share one transition matrix.
      const Mat7 phi = transition_matrix(upper.system, offset);
      const StateVector xu = apply(phi, upper.segments[s].start, offset);
      const StateVector xl = apply(phi, lower.segments[s].start, offset);
      const State6 delta = phi.topLeftCorner<6, 6>() * diff.starts[s];
      const Vec3r dr = delta.head<3>();
      const Vec3r dv = delta.tail<3>();
      const Vec3r sr = xu.position + xl.position;
      const Vec3r sv = xu.velocity + xl.velocity;
      // L(u) - L(l) for a quadratic form, expressed in difference and sum.
      const Real density = dv.dot(sv) / 2 + force.dot(dr) + dr.dot(stiffness * sr) / 2 +
                           omega.dot(dr.cross(sv) + sr.cross(dv)) / 2;
      sum.add(density * (rule.weights[i] * half));
    }
  }
  const Vec3r start_separation = diff.starts.front().head<3>();
  const Vec3r end_separation = diff.final.head<3>();
  sum.add(lagrangian.frame_velocity().dot(end_separation - start_separation));
  return sum.value() * lagrangian.mass();
}

Real action_difference(const ArmTrajectory& upper, const ArmTrajectory& lower,
                       const EnvironmentModel& env, const AtomSpecies& species, int nodes) {
  return action_difference(upper, lower, QuadraticLagrangian(env, species), nodes);
}

}  // namespace iphase
