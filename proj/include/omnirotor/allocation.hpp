#pragma once

// Rotor geometry and the 6xn map from rotor thrusts to body wrench.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "omnirotor/geometry.hpp"

namespace omnirotor {

using Wrench = Eigen::Matrix<double, 6, 1>;

enum class Directionality { Unidirectional, Bidirectional };

struct Rotor {
  Vec3 position;  // from CoM, body frame [m]
  Vec3 axis;      // unit thrust axis, body frame
  int spin = 1;   // +1 or -1; sign of reaction torque per unit thrust
};

struct RotorGeometry {
  std::vector<Rotor> rotors;
  Directionality directionality = Directionality::Bidirectional;
  double torque_per_thrust = 0.15;  // kappa / mu [m]
  // When set, every ||position|| must equal this within 1e-9.
  std::optional<double> arm_length;

  std::size_t size() const { return rotors.size(); }

  /// Throws InvalidArgument on a malformed geometry (axis norms, rotor
  /// count for the directionality, spin signs, arm length).
  void validate() const;
};

inline constexpr double kDefaultMaxCondition = 1e3;

class AllocationMatrix {
 public:
  const Eigen::MatrixXd& matrix() const { return a_; }
  std::size_t rotor_count() const { return static_cast<std::size_t>(a_.cols()); }
  Directionality directionality() const { return directionality_; }
  int rank() const { return rank_; }
  double condition_number() const { return condition_; }
  const Eigen::MatrixXd& right_inverse() const { return inverse_; }

  /// Wrench produced by the given rotor thrusts.
  Wrench apply(const Eigen::VectorXd& thrusts) const;

 private:
  friend AllocationMatrix build_allocation(const RotorGeometry&, double);

  Eigen::MatrixXd a_;
  Eigen::MatrixXd inverse_;
  Directionality directionality_ = Directionality::Bidirectional;
  int rank_ = 0;
  double condition_ = 0.0;
};

/// Column i is [z_i; l_i x z_i + spin_i * torque_per_thrust * z_i].
/// Throws RankDeficient when rank(A) < 6 or cond(A) exceeds max_condition.
AllocationMatrix build_allocation(const RotorGeometry& geometry,
                                  double max_condition = kDefaultMaxCondition);

/// Rotor thrusts realizing `w`: exact inverse for n = 6, minimum-norm
/// pseudo-inverse for n > 6. Throws SingularMatrix if the residual check
/// fails and InfeasibleForUnidirectional if a unidirectional rotor would
/// need negative thrust.
Eigen::VectorXd allocate(const Wrench& w, const AllocationMatrix& a);

/// Six fixed-tilt bidirectional rotors on the vertices of an octahedron
/// seen along its 3-fold axis: azimuths 60 deg apart, alternating above and
/// below the body plane, axes tilted by atan(sqrt(2)) from body z towards
/// the tangential direction with alternating sign. Spins alternate.
RotorGeometry default_hex_config(double arm_length = 0.15, double torque_per_thrust = 0.15);

}  // namespace omnirotor
