#pragma once

// Simulated vehicle: Newton-Euler rigid body driven by rotor thrusts with
// either a first-order thrust lag (TD) or a first-order rotor-speed lag
// (DCMD) actuator model.

#include <vector>

#include <Eigen/Dense>

#include "omnirotor/allocation.hpp"
#include "omnirotor/geometry.hpp"

namespace omnirotor {

enum class RotorModel {
  ThrustDynamics,  // TD: f_dot = (f_cmd - f) / alpha
  MotorDynamics,   // DCMD: Omega_dot = (Omega_cmd - Omega) / alpha_m
};

struct AeroCoefficients {
  double mu = 2.5e-6;      // lift [N s^2]
  double kappa = 3.75e-7;  // drag [N m s^2]
  std::vector<int> spin_signs;
};

struct VehicleParams {
  double mass = 1.0;      // [kg]
  double gravity = 9.81;  // [m/s^2]
  Mat3 inertia = 0.03 * Mat3::Identity();  // [kg m^2]
  double alpha = 0.1;     // thrust time constant of the TD model [s]
  double alpha_m = 0.1;   // speed time constant of the DCMD model [s]
  double mu = 2.5e-6;     // lift coefficient [N s^2]
  double f_max = 10.0;    // nominal max rotor thrust, audit only [N]
  RotorGeometry geometry = default_hex_config();

  AeroCoefficients aero() const;
  /// Throws InvalidArgument if any invariant fails.
  void validate() const;
};

struct RigidBodyState {
  Vec3 p = Vec3::Zero();      // inertial [m]
  Vec3 v = Vec3::Zero();      // inertial [m/s]
  RotationMatrix r;           // body to inertial
  Vec3 omega = Vec3::Zero();  // body [rad/s]
};

struct RotorBank {
  RotorModel model = RotorModel::ThrustDynamics;
  Eigen::VectorXd values;  // thrusts [N] for TD, speeds [rad/s] for DCMD

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  /// Per-rotor thrust [N] regardless of the model.
  Eigen::VectorXd thrusts(double mu) const;
};

/// f = mu * sgn(Omega) * Omega^2
double aero_thrust(double omega_rotor, double mu);
/// tau = spin * kappa * sgn(Omega) * Omega^2
double aero_torque(double omega_rotor, double kappa, int spin_sign);
/// Inverse of aero_thrust.
double thrust_to_speed(double thrust, double mu);

double td_derivative(double thrust, double thrust_cmd, double alpha);
double dcmd_derivative(double omega_rotor, double omega_cmd, double alpha_m);

struct BodyDerivative {
  Vec3 p_dot;
  Vec3 v_dot;
  Vec3 omega;  // R_dot = R [omega]^, integrated on SO(3) by the caller
  Vec3 omega_dot;
};

/// m v_dot = -m g z_I + R F,  J omega_dot = -omega x J omega + M.
/// F and M are body-frame.
BodyDerivative rigid_body_derivative(const RigidBodyState& state, const Vec3& force,
                                     const Vec3& moment, const VehicleParams& params);

struct PlantDerivative {
  BodyDerivative body;
  Eigen::VectorXd rotor_dot;
  Wrench wrench;  // body wrench generated by the current rotor state
};

/// Full plant derivative for thrust commands `thrust_cmd` (length n).
/// Throws DimensionMismatch when sizes disagree.
PlantDerivative plant_derivative(const RigidBodyState& state, const RotorBank& rotors,
                                 const Eigen::VectorXd& thrust_cmd, const VehicleParams& params,
                                 const AllocationMatrix& allocation);

}  // namespace omnirotor
