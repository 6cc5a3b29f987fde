#include "omnirotor/plant.hpp"

#include <cmath>

#include "omnirotor/error.hpp"

namespace omnirotor {

namespace {

double signed_square(double x) { return x * std::abs(x); }

}  // namespace

AeroCoefficients VehicleParams::aero() const {
  AeroCoefficients c;
  c.mu = mu;
  c.kappa = geometry.torque_per_thrust * mu;
  for (const Rotor& r : geometry.rotors) c.spin_signs.push_back(r.spin);
  return c;
}

void VehicleParams::validate() const {
  if (!(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "mass must be positive");
  if (!std::isfinite(gravity)) throw Error(ErrorCode::InvalidArgument, "gravity must be finite");
  if (!(alpha > 0.0) || !(alpha_m > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rotor time constants must be positive");
  }
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "lift coefficient must be positive");
  if (!inertia.allFinite() || (inertia - inertia.transpose()).norm() > 1e-12 ||
      Eigen::SelfAdjointEigenSolver<Mat3>(inertia).eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "inertia must be symmetric positive definite");
  }
  geometry.validate();
}

Eigen::VectorXd RotorBank::thrusts(double mu) const {
  if (model == RotorModel::ThrustDynamics) return values;
  return values.unaryExpr([mu](double w) { return aero_thrust(w, mu); });
}

double aero_thrust(double omega_rotor, double mu) { return mu * signed_square(omega_rotor); }

double aero_torque(double omega_rotor, double kappa, int spin_sign) {
  return spin_sign * kappa * signed_square(omega_rotor);
}

double thrust_to_speed(double thrust, double mu) {
  const double speed = std::sqrt(std::abs(thrust) / mu);
  return thrust < 0.0 ? -speed : speed;
}

double td_derivative(double thrust, double thrust_cmd, double alpha) {
  return (thrust_cmd - thrust) / alpha;
}

double dcmd_derivative(double omega_rotor, double omega_cmd, double alpha_m) {
  return (omega_cmd - omega_rotor) / alpha_m;
}

BodyDerivative rigid_body_derivative(const RigidBodyState& state, const Vec3& force,
                                     const Vec3& moment, const VehicleParams& params) {
  BodyDerivative d;
  d.p_dot = state.v;
  d.v_dot = -params.gravity * Vec3::UnitZ() + (state.r * force) / params.mass;
  d.omega = state.omega;
  const Vec3 gyro = state.omega.cross(params.inertia * state.omega);
  d.omega_dot = params.inertia.ldlt().solve(moment - gyro);
  return d;
}

PlantDerivative plant_derivative(const RigidBodyState& state, const RotorBank& rotors,
                                 const Eigen::VectorXd& thrust_cmd, const VehicleParams& params,
                                 const AllocationMatrix& allocation) {
  const auto n = static_cast<Eigen::Index>(allocation.rotor_count());
  if (rotors.values.size() != n || thrust_cmd.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "rotor state or command length differs from rotor count");
  }

  PlantDerivative d;
  d.rotor_dot.resize(n);
  if (rotors.model == RotorModel::ThrustDynamics) {
    for (Eigen::Index i = 0; i < n; ++i) {
      d.rotor_dot(i) = td_derivative(rotors.values(i), thrust_cmd(i), params.alpha);
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      d.rotor_dot(i) = dcmd_derivative(rotors.values(i), thrust_to_speed(thrust_cmd(i), params.mu),
                                       params.alpha_m);
    }
  }
  d.wrench = allocation.apply(rotors.thrusts(params.mu));
  d.body = rigid_body_derivative(state, d.wrench.head<3>(), d.wrench.tail<3>(), params);
  return d;
}

}  // namespace omnirotor
