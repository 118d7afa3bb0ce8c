#include "iphase/geomodel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace iphase {

AtomSpecies::AtomSpecies(double mass, std::string label)
    : mass_(mass), label_(std::move(label)) {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::domain_error("AtomSpecies: mass must be positive and finite");
  }
}

AtomSpecies AtomSpecies::cesium() { return AtomSpecies(2.21e-25, "Cs"); }

EnvironmentModel::EnvironmentModel()
    : gravity_(Vec3::Zero()),
      gradient_(Mat3::Zero()),
      omega_(Vec3::Zero()),
      earth_offset_(Vec3::Zero()) {}

EnvironmentModel::EnvironmentModel(const Vec3& gravity, const Mat3& gradient,
                                   const Vec3& omega, const Vec3& earth_offset)
    : gravity_(gravity), gradient_(gradient), omega_(omega), earth_offset_(earth_offset) {
  if (!gravity.allFinite() || !gradient.allFinite() || !omega.allFinite() ||
      !earth_offset.allFinite()) {
    throw std::domain_error("EnvironmentModel: non-finite component");
  }
  if (gradient != gradient.transpose()) {
    throw std::domain_error("EnvironmentModel: gradient tensor must be symmetric");
  }
}

EnvironmentModel EnvironmentModel::with_gradient(const Mat3& gradient) const {
  return EnvironmentModel(gravity_, gradient, omega_, earth_offset_);
}

EnvironmentModel EnvironmentModel::with_omega(const Vec3& omega) const {
  return EnvironmentModel(gravity_, gradient_, omega, earth_offset_);
}

bool operator==(const EnvironmentModel& a, const EnvironmentModel& b) {
  return a.gravity_ == b.gravity_ && a.gradient_ == b.gradient_ && a.omega_ == b.omega_ &&
         a.earth_offset_ == b.earth_offset_;
}

std::string_view to_string(DynamicsMode mode) {
  switch (mode) {
    case DynamicsMode::FreeFall:
      return "free_fall";
    case DynamicsMode::NoGradient:
      return "no_gradient";
    case DynamicsMode::Full:
      return "full";
  }
  return "unknown";
}

std::optional<DynamicsMode> parse_dynamics_mode(std::string_view text) {
  if (text == "full" || text == "FULL") return DynamicsMode::Full;
  if (text == "no_gradient" || text == "NO_GRADIENT" || text == "no-gradient") {
    return DynamicsMode::NoGradient;
  }
  if (text == "free_fall" || text == "FREE_FALL" || text == "free-fall") {
    return DynamicsMode::FreeFall;
  }
  return std::nullopt;
}

bool includes(DynamicsMode outer, DynamicsMode inner) {
  return static_cast<int>(outer) >= static_cast<int>(inner);
}

EnvironmentModel build_environment(double latitude, double earth_radius, double g_z,
                                   double omega_magnitude) {
  if (!(earth_radius > 0.0) || !std::isfinite(earth_radius)) {
    throw std::domain_error("build_environment: earth radius must be positive");
  }
  if (!(std::abs(latitude) <= std::numbers::pi / 2)) {
    throw std::domain_error("build_environment: |latitude| must not exceed pi/2");
  }
  const double t_h = g_z / earth_radius;
  Mat3 gradient = Mat3::Zero();
  gradient(0, 0) = t_h;
  gradient(1, 1) = t_h;
  gradient(2, 2) = -2.0 * t_h;
  const Vec3 omega(0.0, omega_magnitude * std::cos(latitude),
                   omega_magnitude * std::sin(latitude));
  return EnvironmentModel(Vec3(0.0, 0.0, g_z), gradient, omega, Vec3(0.0, 0.0, earth_radius));
}

EnvironmentModel degrade_environment(const EnvironmentModel& env, DynamicsMode mode) {
  switch (mode) {
    case DynamicsMode::Full:
      return env;
    case DynamicsMode::NoGradient:
      return env.with_gradient(Mat3::Zero());
    case DynamicsMode::FreeFall:
      return EnvironmentModel(env.gravity(), Mat3::Zero(), Vec3::Zero(), env.earth_offset());
  }
  return env;
}

double degrees_to_radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

}  // namespace iphase
