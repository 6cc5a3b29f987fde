#pragma once

// Geometric PD tracking controller with first-order rotor-lag feedforward.
//
// The proposed mode commands F_d + alpha dF_d/dt and M_d + alpha dM_d/dt,
// with the derivatives taken by backward differences over the control
// period. The conventional mode sends F_d and M_d directly.

#include <optional>

#include "omnirotor/geometry.hpp"
#include "omnirotor/plant.hpp"
#include "omnirotor/stability.hpp"

namespace omnirotor {

struct Gains {
  double kp = 3.0;
  double kv = 1.0;
  double k_r = 1.0;
  double k_omega = 1.0;

  /// Throws NonPositiveConstant if any gain is not positive.
  void validate() const;
};

struct TrajectorySample {
  Vec3 p_d = Vec3::Zero();
  Vec3 v_d = Vec3::Zero();
  Vec3 a_d = Vec3::Zero();
  RotationMatrix r_d;
  Vec3 omega_d = Vec3::Zero();     // body frame of Rd
  Vec3 omegadot_d = Vec3::Zero();
};

struct TrackingErrors {
  Vec3 e_p;
  Vec3 e_v;
  Vec3 e_r;
  Vec3 e_omega;
};

TrackingErrors tracking_errors(const RigidBodyState& state, const TrajectorySample& sample);

struct ControlOutput {
  Vec3 force_cmd = Vec3::Zero();   // body [N]
  Vec3 moment_cmd = Vec3::Zero();  // body [N m]
  Vec3 force_d = Vec3::Zero();
  Vec3 moment_d = Vec3::Zero();
};

enum class ControllerMode { Proposed, Conventional };

struct ControllerState {
  ControllerMode mode = ControllerMode::Proposed;
  std::optional<Vec3> prev_force_d;
  std::optional<Vec3> prev_moment_d;

  void reset() {
    prev_force_d.reset();
    prev_moment_d.reset();
  }
};

/// F_d = R^T (-kp e_p - kv e_v + m g z_I + m a_d)
Vec3 desired_force(const Vec3& e_p, const Vec3& e_v, const RotationMatrix& r, const Vec3& a_d,
                   const Gains& gains, double mass, double gravity);

/// F_d + alpha * (F_d - F_d_prev) / dt; the first call uses a zero
/// derivative. Updates the force history in `state`.
Vec3 commanded_force(const Vec3& force_d, ControllerState& state, double alpha, double dt);

/// M_d = -kR e_R - kw e_w + w x J w - J([w]^ R^T Rd w_d - R^T Rd w_d_dot)
Vec3 desired_moment(const Vec3& e_r, const Vec3& e_omega, const Vec3& omega,
                    const RotationMatrix& r, const RotationMatrix& r_d, const Vec3& omega_d,
                    const Vec3& omegadot_d, const Gains& gains, const Mat3& inertia);

Vec3 commanded_moment(const Vec3& moment_d, ControllerState& state, double alpha, double dt);

/// One control update. Uses params.alpha as the assumed thrust time constant.
ControlOutput control_step(const RigidBodyState& state, const TrajectorySample& sample,
                           const Gains& gains, const VehicleParams& params,
                           ControllerState& controller_state, double dt);

/// Sufficient gain conditions for the two certificates.
struct GainReport {
  double c1 = 0.0;
  double c2 = 0.0;
  double lambda_min = 0.0;          // of J
  double kp_bound = 0.0;            // kp must exceed this
  double kv_bound = 0.0;            // c1 + 1/4
  double k_r_bound = 0.0;
  double k_omega_bound = 0.0;       // c2 + 1/4
  bool kp_ok = false;
  bool kv_ok = false;
  bool k_r_ok = false;
  bool k_omega_ok = false;

  bool translational_ok() const { return kp_ok && kv_ok; }
  bool rotational_ok() const { return k_r_ok && k_omega_ok; }
  bool valid() const { return translational_ok() && rotational_ok(); }
};

/// Evaluates
///   kp > (c1 kv^2 + 2 c1 kv - c1^2) / (m (4 (kv - c1) - 1)),  kv > c1 + 1/4
///   kR > c2 kw^2 / (lambda_min (4 (kw - c2) - 1)),             kw > c2 + 1/4
/// Throws NonPositiveConstant unless c1, c2 > 0.
GainReport validate_gains(const Gains& gains, double c1, double c2, double mass,
                          const Mat3& inertia);

struct FeasibleConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  TranslationalCertificate translational;
  RotationalCertificate rotational;

  double decay_rate() const;
};

/// Grid search for (c1, c2) that pass validate_gains and make all six
/// certificate matrices positive definite. Each constant is chosen to
/// maximize its certified decay rate, ties going to the smaller value.
std::optional<FeasibleConstants> find_feasible_constants(const Gains& gains, double mass,
                                                         const Mat3& inertia, double alpha,
                                                         double psi_bar,
                                                         int grid_points = 2000);

}  // namespace omnirotor
