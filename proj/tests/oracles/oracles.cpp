#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

namespace odeint = boost::numeric::odeint;

V3 widen(const iphase::Vec3& v) { return v.cast<LD>(); }

V3 acceleration(const iphase::EnvironmentModel& env, const V3& r, const V3& v) {
  const V3 g = widen(env.gravity());
  const V3 w = widen(env.omega());
  const V3 R = widen(env.earth_offset());
  const Eigen::Matrix<LD, 3, 3> T = env.gradient().cast<LD>();
  return g + T * r - 2 * w.cross(v) - w.cross(w.cross(r + R));
}

State pack(const V3& r, const V3& v) { return {r.x(), r.y(), r.z(), v.x(), v.y(), v.z()}; }
V3 position(const State& x) { return V3(x[0], x[1], x[2]); }
V3 velocity(const State& x) { return V3(x[3], x[4], x[5]); }

State rk_propagate(const iphase::EnvironmentModel& env, const State& x0, LD dt) {
  if (dt == 0) return x0;
  auto rhs = [&env](const State& x, State& dxdt, LD /*t*/) {
    const V3 a = acceleration(env, position(x), velocity(x));
    dxdt = {x[3], x[4], x[5], a.x(), a.y(), a.z()};
  };
  using Stepper = odeint::runge_kutta_fehlberg78<State, LD>;
  State x = x0;
  odeint::integrate_adaptive(odeint::make_controlled<Stepper>(1e-22L, 1e-20L), rhs, x, LD(0), dt,
                             dt / 64);
  return x;
}

std::vector<State> rk_arm(const iphase::InterferometerDefinition& defn, iphase::Arm which,
                          const iphase::EnvironmentModel& env, LD hbar_over_m) {
  const iphase::ArmRecipe& recipe = which == iphase::Arm::Upper ? defn.upper : defn.lower;
  std::vector<State> arrivals;
  State x = pack(defn.initial_state.position, defn.initial_state.velocity);
  LD t = defn.initial_state.epoch;
  for (std::size_t i = 0; i < defn.pulses.size(); ++i) {
    const iphase::Pulse& p = defn.pulses[i];
    x = rk_propagate(env, x, static_cast<LD>(p.epoch) - t);
    t = p.epoch;
    arrivals.push_back(x);
    int sign = 0;
    if (recipe.steps[i].transition == iphase::Transition::Up) sign = 1;
    if (recipe.steps[i].transition == iphase::Transition::Down) sign = -1;
    const V3 dv = sign * hbar_over_m * widen(p.k_vector);
    for (int j = 0; j < 3; ++j) x[3 + j] += dv[j];
  }
  return arrivals;
}

LD lagrangian(const iphase::EnvironmentModel& env, LD mass, const V3& r, const V3& v) {
  const V3 g = widen(env.gravity());
  const V3 w = widen(env.omega());
  const V3 R = widen(env.earth_offset());
  const Eigen::Matrix<LD, 3, 3> T = env.gradient().cast<LD>();
  const V3 inertial = v + w.cross(r + R);
  const V3 frame = w.cross(R);
  return mass * ((inertial.squaredNorm() - frame.squaredNorm()) / 2 + g.dot(r) + r.dot(T * r) / 2);
}

namespace {

// One-step map x -> A x + b for the augmented state (x, 1), with the
// columns of A read off the acceleration field.
Eigen::Matrix<LD, 7, 7> generator(const iphase::EnvironmentModel& env) {
  Eigen::Matrix<LD, 7, 7> G = Eigen::Matrix<LD, 7, 7>::Zero();
  const V3 zero = V3::Zero();
  const V3 b = acceleration(env, zero, zero);
  for (int j = 0; j < 3; ++j) {
    G(j, 3 + j) = 1;
    const V3 e = V3::Unit(j);
    G.block<3, 1>(3, j) = acceleration(env, e, zero) - b;
    G.block<3, 1>(3, 3 + j) = acceleration(env, zero, e) - b;
  }
  G.block<3, 1>(3, 6) = b;
  return G;
}

}  // namespace

LD simpson_action(const iphase::ArmTrajectory& traj, const iphase::EnvironmentModel& env, LD mass,
                  int steps) {
  if (steps < 2 || steps % 2 != 0) throw std::invalid_argument("simpson_action: steps must be even");
  const Eigen::Matrix<LD, 7, 7> G = generator(env);
  LD total = 0;
  for (const iphase::Segment& seg : traj.segments) {
    if (seg.duration == 0) continue;
    const LD h = seg.duration / steps;
    const Eigen::Matrix<LD, 7, 7> step = (G * h).exp();
    Eigen::Matrix<LD, 7, 1> x;
    x << seg.start.position, seg.start.velocity, 1;
    LD sum = 0;
    LD c = 0;  // Kahan
    for (int i = 0; i <= steps; ++i) {
      const LD w = (i == 0 || i == steps) ? 1 : (i % 2 == 1 ? 4 : 2);
      const LD y = w * lagrangian(env, mass, x.head<3>(), x.segment<3>(3)) - c;
      const LD t = sum + y;
      c = (t - sum) - y;
      sum = t;
      x = step * x;
    }
    total += sum * h / 3;
  }
  return total;
}

LD relative(const V3& a, const V3& b) { return (a - b).norm() / b.norm(); }

}  // namespace oracle
