#include "omnirotor/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "omnirotor/error.hpp"

namespace omnirotor {

void Gains::validate() const {
  if (!(kp > 0.0 && kv > 0.0 && k_r > 0.0 && k_omega > 0.0)) {
    throw Error(ErrorCode::NonPositiveConstant, "controller gains must be positive");
  }
}

TrackingErrors tracking_errors(const RigidBodyState& state, const TrajectorySample& sample) {
  return TrackingErrors{
      state.p - sample.p_d,
      state.v - sample.v_d,
      attitude_error(state.r, sample.r_d),
      angular_velocity_error(state.omega, state.r, sample.r_d, sample.omega_d),
  };
}

Vec3 desired_force(const Vec3& e_p, const Vec3& e_v, const RotationMatrix& r, const Vec3& a_d,
                   const Gains& gains, double mass, double gravity) {
  const Vec3 inertial =
      -gains.kp * e_p - gains.kv * e_v + mass * gravity * Vec3::UnitZ() + mass * a_d;
  return r.matrix().transpose() * inertial;
}

namespace {

Vec3 with_feedforward(const Vec3& value, std::optional<Vec3>& previous, ControllerMode mode,
                      double alpha, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "control period must be positive");
  Vec3 rate = Vec3::Zero();
  if (previous) rate = (value - *previous) / dt;
  previous = value;
  if (mode == ControllerMode::Conventional) return value;
  return value + alpha * rate;
}

}  // namespace

Vec3 commanded_force(const Vec3& force_d, ControllerState& state, double alpha, double dt) {
  return with_feedforward(force_d, state.prev_force_d, state.mode, alpha, dt);
}

Vec3 desired_moment(const Vec3& e_r, const Vec3& e_omega, const Vec3& omega,
                    const RotationMatrix& r, const RotationMatrix& r_d, const Vec3& omega_d,
                    const Vec3& omegadot_d, const Gains& gains, const Mat3& inertia) {
  const Mat3 rt_rd = r.matrix().transpose() * r_d.matrix();
  return -gains.k_r * e_r - gains.k_omega * e_omega + omega.cross(inertia * omega) -
         inertia * (wedge(omega) * rt_rd * omega_d - rt_rd * omegadot_d);
}

Vec3 commanded_moment(const Vec3& moment_d, ControllerState& state, double alpha, double dt) {
  return with_feedforward(moment_d, state.prev_moment_d, state.mode, alpha, dt);
}

ControlOutput control_step(const RigidBodyState& state, const TrajectorySample& sample,
                           const Gains& gains, const VehicleParams& params,
                           ControllerState& controller_state, double dt) {
  const TrackingErrors e = tracking_errors(state, sample);
  ControlOutput out;
  out.force_d = desired_force(e.e_p, e.e_v, state.r, sample.a_d, gains, params.mass, params.gravity);
  out.moment_d = desired_moment(e.e_r, e.e_omega, state.omega, state.r, sample.r_d,
                                sample.omega_d, sample.omegadot_d, gains, params.inertia);
  out.force_cmd = commanded_force(out.force_d, controller_state, params.alpha, dt);
  out.moment_cmd = commanded_moment(out.moment_d, controller_state, params.alpha, dt);
  return out;
}

GainReport validate_gains(const Gains& gains, double c1, double c2, double mass,
                          const Mat3& inertia) {
  if (!(c1 > 0.0) || !(c2 > 0.0)) {
    throw Error(ErrorCode::NonPositiveConstant, "design constants c1, c2 must be positive");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  GainReport r;
  r.c1 = c1;
  r.c2 = c2;
  r.lambda_min = min_eigenvalue(inertia);

  r.kv_bound = c1 + 0.25;
  r.kv_ok = gains.kv > r.kv_bound;
  const double den1 = mass * (4.0 * (gains.kv - c1) - 1.0);
  r.kp_bound = den1 > 0.0
                   ? (c1 * gains.kv * gains.kv + 2.0 * c1 * gains.kv - c1 * c1) / den1
                   : kInf;
  r.kp_ok = gains.kp > r.kp_bound;

  r.k_omega_bound = c2 + 0.25;
  r.k_omega_ok = gains.k_omega > r.k_omega_bound;
  const double den2 = r.lambda_min * (4.0 * (gains.k_omega - c2) - 1.0);
  r.k_r_bound = den2 > 0.0 ? c2 * gains.k_omega * gains.k_omega / den2 : kInf;
  r.k_r_ok = gains.k_r > r.k_r_bound;
  return r;
}

double FeasibleConstants::decay_rate() const {
  return std::min(translational.decay_rate, rotational.decay_rate);
}

std::optional<FeasibleConstants> find_feasible_constants(const Gains& gains, double mass,
                                                         const Mat3& inertia, double alpha,
                                                         double psi_bar, int grid_points) {
  gains.validate();
  const double upper1 = gains.kv - 0.25;
  const double upper2 = gains.k_omega - 0.25;
  if (!(upper1 > 0.0) || !(upper2 > 0.0) || grid_points < 2) return std::nullopt;

  std::optional<TranslationalCertificate> best1;
  std::optional<RotationalCertificate> best2;
  for (int k = 1; k < grid_points; ++k) {
    const double frac = static_cast<double>(k) / grid_points;
    const double c1 = frac * upper1;
    const double c2 = frac * upper2;
    const GainReport report = validate_gains(gains, c1, c2, mass, inertia);

    if (report.translational_ok()) {
      auto cert = build_translational_certificate(gains.kp, gains.kv, c1, mass, alpha);
      if (cert.valid && (!best1 || cert.decay_rate > best1->decay_rate)) best1 = cert;
    }
    if (report.rotational_ok()) {
      auto cert = build_rotational_certificate(gains.k_r, gains.k_omega, c2, inertia, alpha,
                                               psi_bar);
      if (cert.valid && (!best2 || cert.decay_rate > best2->decay_rate)) best2 = cert;
    }
  }
  if (!best1 || !best2) return std::nullopt;
  return FeasibleConstants{best1->c1, best2->c2, *best1, *best2};
}

}  // namespace omnirotor
