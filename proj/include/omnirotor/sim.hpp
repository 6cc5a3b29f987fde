#pragma once

// Fixed-step closed-loop simulation of the omnidirectional vehicle.

#include <array>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "omnirotor/controller.hpp"
#include "omnirotor/error.hpp"
#include "omnirotor/plant.hpp"
#include "omnirotor/stability.hpp"

namespace omnirotor {

// ---------------------------------------------------------------------------
// Integration

/// Vehicle plus actuator state advanced by the integrator.
struct StateBundle {
  RigidBodyState body;
  Eigen::VectorXd rotors;
};

struct BundleDerivative {
  Vec3 p_dot = Vec3::Zero();
  Vec3 v_dot = Vec3::Zero();
  Vec3 omega = Vec3::Zero();  // body rate driving R
  Vec3 omega_dot = Vec3::Zero();
  Eigen::VectorXd rotor_dot;
};

/// Inverse right Jacobian of exp on so(3), truncated after the second-order
/// term (enough for a fourth-order Munthe-Kaas step).
Vec3 dexp_inv(const Vec3& theta, const Vec3& omega);

/// Classical RK4 on (p, v, omega, rotors); R is advanced as
/// R0 exp(dt * effective omega) with Munthe-Kaas stage corrections, then
/// renormalized.
template <typename Derivative>
StateBundle rk4_step(const StateBundle& y0, Derivative&& f, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "rk4_step requires dt > 0");
  const RotationMatrix& r0 = y0.body.r;

  auto stage = [&](const BundleDerivative& k, double h, const Vec3& theta) {
    StateBundle y;
    y.body.p = y0.body.p + h * k.p_dot;
    y.body.v = y0.body.v + h * k.v_dot;
    y.body.omega = y0.body.omega + h * k.omega_dot;
    y.body.r = r0 * exp_so3(theta, 1.0);
    y.rotors = y0.rotors + h * k.rotor_dot;
    return y;
  };

  const BundleDerivative k1 = f(y0);
  const Vec3 w1 = k1.omega;
  const Vec3 th2 = 0.5 * dt * w1;
  const BundleDerivative k2 = f(stage(k1, 0.5 * dt, th2));
  const Vec3 w2 = dexp_inv(th2, k2.omega);
  const Vec3 th3 = 0.5 * dt * w2;
  const BundleDerivative k3 = f(stage(k2, 0.5 * dt, th3));
  const Vec3 w3 = dexp_inv(th3, k3.omega);
  const Vec3 th4 = dt * w3;
  const BundleDerivative k4 = f(stage(k3, dt, th4));
  const Vec3 w4 = dexp_inv(th4, k4.omega);

  const double s = dt / 6.0;
  StateBundle y1;
  y1.body.p = y0.body.p + s * (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot);
  y1.body.v = y0.body.v + s * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
  y1.body.omega =
      y0.body.omega + s * (k1.omega_dot + 2.0 * k2.omega_dot + 2.0 * k3.omega_dot + k4.omega_dot);
  y1.rotors = y0.rotors + s * (k1.rotor_dot + 2.0 * k2.rotor_dot + 2.0 * k3.rotor_dot + k4.rotor_dot);
  const Vec3 theta = s * (w1 + 2.0 * w2 + 2.0 * w3 + w4);
  y1.body.r = renormalize((r0 * exp_so3(theta, 1.0)).matrix());
  return y1;
}

// ---------------------------------------------------------------------------
// Trajectories

enum class TrajectoryKind { CircleTumble, ForceSine, Hover, StepAttitude };

std::string_view to_string(TrajectoryKind kind);
/// Throws ConfigParse on an unknown name.
TrajectoryKind parse_trajectory_kind(std::string_view name);

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::CircleTumble;
  // circle_tumble
  double radius = 1.0;         // [m]
  double height = 1.0;         // [m]
  double position_rate = 1.0;  // counterclockwise circling rate [rad/s]
  double attitude_rate = 1.0;  // tumbling rate about inertial x [rad/s]
  // force_sine
  double amplitude = 16.0;                         // [N]
  double frequency = 4.0 * std::numbers::pi / 3.0;  // [rad/s]
  // hover / step_attitude
  Vec3 hover_position = Vec3(0.0, 0.0, 1.0);
  Vec3 attitude_axis = Vec3::UnitX();
  double attitude_angle = 0.5;  // [rad]

  void validate() const;
};

TrajectorySample circle_tumble(double t, const TrajectorySpec& spec);
TrajectorySample hover(double t, const TrajectorySpec& spec);
TrajectorySample step_attitude(double t, const TrajectorySpec& spec);

struct ForceSample {
  double force = 0.0;  // desired F_z [N]
  double rate = 0.0;   // analytic dF_z/dt [N/s]
};

ForceSample force_sine(double t, const TrajectorySpec& spec);

/// Pose reference for the pose-tracking variants. Throws InvalidArgument
/// for ForceSine, which has no pose reference.
TrajectorySample sample_trajectory(double t, const TrajectorySpec& spec);

// ---------------------------------------------------------------------------
// Scenarios

struct InitialCondition {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  RotationMatrix attitude;
  Vec3 omega = Vec3::Zero();
  /// Rotors start at the allocation of the initial F_d, M_d; otherwise at rest.
  bool warm_start = true;
  // Seeded Gaussian perturbations (standard deviations).
  double position_sigma = 0.0;  // [m]
  double velocity_sigma = 0.0;  // [m/s]
  double attitude_sigma = 0.0;  // rotation angle [rad] about a random axis
  double omega_sigma = 0.0;     // [rad/s]
  double thrust_sigma = 0.0;    // per-rotor thrust [N]
};

struct SimConfig {
  double dt = 1e-3;
  double duration = 10.0;
  RotorModel plant_model = RotorModel::ThrustDynamics;
  ControllerMode controller_mode = ControllerMode::Proposed;
  TrajectorySpec trajectory;
  std::uint64_t seed = 0;
  int control_decimation = 1;
  InitialCondition initial;
  /// Design constants for the certificates; searched for when absent.
  std::optional<double> c1;
  std::optional<double> c2;
  std::optional<double> psi_bar;
  /// Run even when the gains cannot be certified.
  bool force = false;
  double divergence_limit = 1e6;

  void validate() const;
  std::size_t step_count() const;
};

struct TraceRow {
  double t = 0.0;
  RigidBodyState state;
  Eigen::VectorXd rotors;
  Vec3 e_p, e_v, e_r, e_omega, e_f, e_m;
  Vec3 force, moment;          // generated by the rotors
  Vec3 force_cmd, moment_cmd;  // held commands
  Vec3 force_d, moment_d;      // evaluated at this row's state
  double v1 = 0.0, v2 = 0.0, v = 0.0;
  double psi = 0.0;
};

struct TraceLog {
  RotorModel model = RotorModel::ThrustDynamics;
  std::size_t rotor_count = 0;
  std::vector<TraceRow> rows;

  LyapunovTrace lyapunov() const;
};

enum class ErrorChannel { Position, Velocity, Attitude, AngularVelocity, Force, Moment };
inline constexpr std::array<ErrorChannel, 6> kErrorChannels{
    ErrorChannel::Position, ErrorChannel::Velocity, ErrorChannel::Attitude,
    ErrorChannel::AngularVelocity, ErrorChannel::Force, ErrorChannel::Moment};

std::string_view to_string(ErrorChannel channel);
const Vec3& error_of(const TraceRow& row, ErrorChannel channel);

/// RMS of ||e|| over rows with t in [t_begin, t_end].
double rms_norm(const TraceLog& trace, ErrorChannel channel, double t_begin, double t_end);

struct ErrorStats {
  double rms = 0.0;
  double max = 0.0;
  double rms_tail = 0.0;  // final 20% of the run
  double max_tail = 0.0;
  /// Time after which ||e|| stays below 5% of its peak.
  double settle_time = 0.0;
};

struct Metrics {
  std::array<ErrorStats, 6> errors{};  // indexed like kErrorChannels
  std::optional<DecayReport> decay;
  double max_abs_thrust = 0.0;
  bool exceeded_f_max = false;

  const ErrorStats& of(ErrorChannel c) const { return errors[static_cast<std::size_t>(c)]; }
};

Metrics compute_metrics(const TraceLog& trace, double f_max, double mu);

struct ScenarioResult {
  TraceLog trace;
  Metrics metrics;
  GainReport gain_report;
  std::optional<TranslationalCertificate> translational;
  std::optional<RotationalCertificate> rotational;
  double psi_bar = 0.0;
  std::vector<std::string> warnings;
};

/// Thrown when a state norm exceeds the divergence limit; carries the
/// trace recorded up to that point.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, TraceLog partial)
      : Error(ErrorCode::NumericalDivergence, what), partial_(std::move(partial)) {}
  const TraceLog& partial_trace() const { return partial_; }

 private:
  TraceLog partial_;
};

/// Closed-loop run. Throws GainInfeasible when no certificate can be built
/// (unless config.force), DivergenceError on blow-up.
ScenarioResult run_scenario(const SimConfig& config, const VehicleParams& params,
                            const Gains& gains);

struct ComparisonReport {
  ScenarioResult proposed;
  ScenarioResult conventional;
  /// Conventional / proposed RMS per channel over the full run.
  std::array<double, 6> rms_ratio{};
  /// Same over the final 20%.
  std::array<double, 6> rms_ratio_tail{};
};

/// Runs both controller modes on the same config and seed (concurrently).
ComparisonReport compare_controllers(const SimConfig& config, const VehicleParams& params,
                                     const Gains& gains);

// ---------------------------------------------------------------------------
// Actuator experiments

struct StepResponseTrace {
  double alpha_f = 0.0;
  double alpha_m = 0.0;
  std::vector<double> t;
  std::vector<double> td;          // normalized thrust, TD model
  std::vector<double> dcmd;        // normalized thrust, DCMD model
  std::vector<double> dcmd_speed;  // normalized rotor speed, DCMD model
};

/// Unit (max-thrust) command step through both rotor models.
StepResponseTrace step_response_experiment(double alpha_f, double alpha_m, double dt,
                                           double duration, double mu = 2.5e-6,
                                           double f_max = 10.0);

struct ForceTrackConfig {
  VehicleParams params;  // params.alpha is both the TD plant and controller constant
  RotorModel plant_model = RotorModel::ThrustDynamics;
  ControllerMode mode = ControllerMode::Proposed;
  double amplitude = 16.0;
  double frequency = 4.0 * std::numbers::pi / 3.0;
  double dt = 1e-3;
  double duration = 6.0;
};

struct ForceTrackTrace {
  ControllerMode mode = ControllerMode::Proposed;
  std::vector<double> t;
  std::vector<double> fz_d;       // desired [N]
  std::vector<double> fz_d_rate;  // analytic derivative [N/s]
  std::vector<double> fz_cmd;     // commanded [N]
  std::vector<double> fz;         // generated by the rotors [N]
};

/// Vehicle clamped at identity attitude; the desired body force is
/// [0, 0, A sin(nu t)] and the moment is held at zero.
ForceTrackTrace force_track_experiment(const ForceTrackConfig& config);

struct ForceTrackStats {
  double max_abs_error = 0.0;    // max |F_z - F_z,d| for t >= t_from
  double amplitude_ratio = 0.0;  // fitted |F_z| / A
  double phase_lag = 0.0;        // fitted lag of F_z behind F_z,d [rad]
};

/// Least-squares sinusoid fit at the reference frequency over t >= t_from.
ForceTrackStats analyze_force_tracking(const ForceTrackTrace& trace, double amplitude,
                                       double frequency, double t_from);

}  // namespace omnirotor
