#include "omnirotor/allocation.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "omnirotor/error.hpp"

namespace omnirotor {

void RotorGeometry::validate() const {
  const std::size_t min_rotors = directionality == Directionality::Bidirectional ? 6 : 7;
  if (rotors.size() < min_rotors) {
    throw Error(ErrorCode::InvalidArgument,
                "omnidirectional flight needs at least " + std::to_string(min_rotors) +
                    " rotors, got " + std::to_string(rotors.size()));
  }
  if (!std::isfinite(torque_per_thrust)) {
    throw Error(ErrorCode::InvalidArgument, "torque_per_thrust must be finite");
  }
  for (std::size_t i = 0; i < rotors.size(); ++i) {
    const Rotor& r = rotors[i];
    const std::string tag = "rotor " + std::to_string(i) + ": ";
    if (!r.position.allFinite() || !r.axis.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, tag + "non-finite position or axis");
    }
    if (std::abs(r.axis.norm() - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, tag + "axis is not a unit vector");
    }
    if (r.spin != 1 && r.spin != -1) {
      throw Error(ErrorCode::InvalidArgument, tag + "spin must be +1 or -1");
    }
    if (arm_length && std::abs(r.position.norm() - *arm_length) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, tag + "distance from CoM differs from arm length");
    }
  }
}

Wrench AllocationMatrix::apply(const Eigen::VectorXd& thrusts) const {
  if (thrusts.size() != a_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "thrust vector length differs from rotor count");
  }
  return a_ * thrusts;
}

AllocationMatrix build_allocation(const RotorGeometry& geometry, double max_condition) {
  geometry.validate();
  const auto n = static_cast<Eigen::Index>(geometry.size());

  AllocationMatrix out;
  out.directionality_ = geometry.directionality;
  out.a_.resize(6, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Rotor& r = geometry.rotors[static_cast<std::size_t>(i)];
    out.a_.col(i).head<3>() = r.axis;
    out.a_.col(i).tail<3>() =
        r.position.cross(r.axis) + r.spin * geometry.torque_per_thrust * r.axis;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.a_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  const double threshold = 1e-10 * s(0);
  out.rank_ = static_cast<int>((s.array() > threshold).count());
  if (out.rank_ < 6) {
    throw Error(ErrorCode::RankDeficient,
                "allocation matrix has rank " + std::to_string(out.rank_) + " < 6");
  }
  out.condition_ = s(0) / s(5);
  if (!std::isfinite(out.condition_) || out.condition_ > max_condition) {
    throw Error(ErrorCode::RankDeficient,
                "allocation matrix condition number " + std::to_string(out.condition_) +
                    " exceeds bound");
  }

  if (n == 6) {
    out.inverse_ = out.a_.partialPivLu().inverse();
  } else {
    out.inverse_ = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  }
  return out;
}

Eigen::VectorXd allocate(const Wrench& w, const AllocationMatrix& a) {
  if (a.rank() < 6) throw Error(ErrorCode::SingularMatrix, "allocation matrix is singular");
  Eigen::VectorXd f = a.right_inverse() * w;
  const double residual = (a.matrix() * f - w).norm();
  if (!f.allFinite() || residual > 1e-9 * (1.0 + w.norm())) {
    throw Error(ErrorCode::SingularMatrix, "allocation residual too large");
  }
  if (a.directionality() == Directionality::Unidirectional && (f.array() < -1e-12).any()) {
    throw Error(ErrorCode::InfeasibleForUnidirectional,
                "wrench requires negative thrust on a unidirectional rotor");
  }
  return f;
}

RotorGeometry default_hex_config(double arm_length, double torque_per_thrust) {
  if (!(arm_length > 0.0)) throw Error(ErrorCode::InvalidArgument, "arm_length must be positive");

  const double elevation = std::asin(1.0 / std::sqrt(3.0));
  const double tilt = std::atan(std::sqrt(2.0));

  RotorGeometry g;
  g.directionality = Directionality::Bidirectional;
  g.torque_per_thrust = torque_per_thrust;
  g.arm_length = arm_length;
  for (int i = 0; i < 6; ++i) {
    const double azimuth = i * std::numbers::pi / 3.0;
    const int side = i % 2 == 0 ? 1 : -1;
    const double e = side * elevation;
    const Vec3 radial(std::cos(azimuth), std::sin(azimuth), 0.0);
    const Vec3 tangential(-std::sin(azimuth), std::cos(azimuth), 0.0);

    Rotor r;
    r.position = arm_length * (std::cos(e) * radial + std::sin(e) * Vec3::UnitZ());
    r.axis = (std::cos(tilt) * Vec3::UnitZ() + side * std::sin(tilt) * tangential).normalized();
    r.spin = side;
    g.rotors.push_back(r);
  }
  return g;
}

}  // namespace omnirotor
