#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace iphase {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct PhysicalConstants {
  double hbar = 1.054571817e-34;  // J s
};

/// Sidereal rotation rate of the Earth, rad/s.
inline constexpr double kSiderealRotationRate = 7.292115e-5;

/// Rotation rate that reproduces the published high-order rotation terms at
/// latitude 41 deg (best fit over all Omega-dependent rows), rad/s.
inline constexpr double kTableRotationRate = 7.01e-5;

class AtomSpecies {
 public:
  /// Throws std::domain_error unless mass > 0.
  AtomSpecies(double mass, std::string label);

  static AtomSpecies cesium();

  double mass() const { return mass_; }
  const std::string& label() const { return label_; }

 private:
  double mass_;
  std::string label_;
};

/// Earth-fixed frame: x east, y north (horizontal), z radially outward.
/// The coordinate origin sits at earth_offset from the Earth's center.
class EnvironmentModel {
 public:
  EnvironmentModel();

  /// Throws std::domain_error if the gradient is not exactly symmetric or any
  /// entry is non-finite.
  EnvironmentModel(const Vec3& gravity, const Mat3& gradient, const Vec3& omega,
                   const Vec3& earth_offset);

  const Vec3& gravity() const { return gravity_; }
  const Mat3& gradient() const { return gradient_; }
  const Vec3& omega() const { return omega_; }
  const Vec3& earth_offset() const { return earth_offset_; }

  EnvironmentModel with_gradient(const Mat3& gradient) const;
  EnvironmentModel with_omega(const Vec3& omega) const;

  friend bool operator==(const EnvironmentModel& a, const EnvironmentModel& b);

 private:
  Vec3 gravity_;
  Mat3 gradient_;
  Vec3 omega_;
  Vec3 earth_offset_;
};

/// Ordered by how many terms of the full Lagrangian the dynamics keep:
/// FreeFall keeps gravity only, NoGradient adds rotation, Full adds T_ij.
enum class DynamicsMode { FreeFall = 0, NoGradient = 1, Full = 2 };

std::string_view to_string(DynamicsMode mode);
std::optional<DynamicsMode> parse_dynamics_mode(std::string_view text);

/// True if every term kept by `inner` is also kept by `outer`.
bool includes(DynamicsMode outer, DynamicsMode inner);

/// Spherical-Earth environment. gravity = (0, 0, g_z), gradient =
/// diag(g_z/R, g_z/R, -2 g_z/R), omega = Omega (0, cos lat, sin lat),
/// earth_offset = (0, 0, R). Throws std::domain_error for R <= 0 or
/// |latitude| > pi/2.
EnvironmentModel build_environment(double latitude, double earth_radius, double g_z,
                                   double omega_magnitude);

EnvironmentModel degrade_environment(const EnvironmentModel& env, DynamicsMode mode);

double degrees_to_radians(double degrees);

}  // namespace iphase
