#include "omnirotor/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

namespace omnirotor {

Vec3 dexp_inv(const Vec3& theta, const Vec3& omega) {
  const Vec3 tw = theta.cross(omega);
  return omega + 0.5 * tw + theta.cross(tw) / 12.0;
}

// ---------------------------------------------------------------------------
// Trajectories

std::string_view to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::CircleTumble: return "circle_tumble";
    case TrajectoryKind::ForceSine: return "force_sine";
    case TrajectoryKind::Hover: return "hover";
    case TrajectoryKind::StepAttitude: return "step_attitude";
  }
  return "unknown";
}

TrajectoryKind parse_trajectory_kind(std::string_view name) {
  for (auto kind : {TrajectoryKind::CircleTumble, TrajectoryKind::ForceSine,
                    TrajectoryKind::Hover, TrajectoryKind::StepAttitude}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::ConfigParse, "unknown trajectory '" + std::string(name) + "'");
}

void TrajectorySpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
  };
  switch (kind) {
    case TrajectoryKind::CircleTumble:
      require(radius > 0.0, "circle radius must be positive");
      require(std::isfinite(height), "circle height must be finite");
      require(std::isfinite(position_rate) && std::isfinite(attitude_rate),
              "circle rates must be finite");
      break;
    case TrajectoryKind::ForceSine:
      require(amplitude > 0.0, "force amplitude must be positive");
      require(frequency > 0.0, "force frequency must be positive");
      break;
    case TrajectoryKind::StepAttitude:
      require(attitude_axis.norm() > 0.0, "attitude axis must be nonzero");
      require(std::isfinite(attitude_angle), "attitude angle must be finite");
      [[fallthrough]];
    case TrajectoryKind::Hover:
      require(hover_position.allFinite(), "hover position must be finite");
      break;
  }
}

TrajectorySample circle_tumble(double t, const TrajectorySpec& spec) {
  const double r = spec.radius;
  const double w = spec.position_rate;
  const double c = std::cos(w * t);
  const double s = std::sin(w * t);
  TrajectorySample out;
  out.p_d = Vec3(r * c, r * s, spec.height);
  out.v_d = Vec3(-r * w * s, r * w * c, 0.0);
  out.a_d = Vec3(-r * w * w * c, -r * w * w * s, 0.0);
  out.r_d = RotationMatrix::about_x(spec.attitude_rate * t);
  // Rotation about inertial x equals rotation about body x for rot_x(.).
  out.omega_d = Vec3(spec.attitude_rate, 0.0, 0.0);
  out.omegadot_d = Vec3::Zero();
  return out;
}

TrajectorySample hover(double, const TrajectorySpec& spec) {
  TrajectorySample out;
  out.p_d = spec.hover_position;
  return out;
}

TrajectorySample step_attitude(double t, const TrajectorySpec& spec) {
  TrajectorySample out = hover(t, spec);
  out.r_d = RotationMatrix::about_axis(spec.attitude_axis, spec.attitude_angle);
  return out;
}

ForceSample force_sine(double t, const TrajectorySpec& spec) {
  const double a = spec.amplitude;
  const double nu = spec.frequency;
  return ForceSample{a * std::sin(nu * t), a * nu * std::cos(nu * t)};
}

TrajectorySample sample_trajectory(double t, const TrajectorySpec& spec) {
  switch (spec.kind) {
    case TrajectoryKind::CircleTumble: return circle_tumble(t, spec);
    case TrajectoryKind::Hover: return hover(t, spec);
    case TrajectoryKind::StepAttitude: return step_attitude(t, spec);
    case TrajectoryKind::ForceSine: break;
  }
  throw Error(ErrorCode::InvalidArgument,
              "force_sine has no pose reference; use the force tracking experiment");
}

// ---------------------------------------------------------------------------
// Scenario plumbing

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(duration >= dt)) throw Error(ErrorCode::InvalidArgument, "duration must be at least dt");
  if (control_decimation < 1) {
    throw Error(ErrorCode::InvalidArgument, "control decimation must be >= 1");
  }
  if (psi_bar && !(*psi_bar >= 0.0 && *psi_bar < 2.0)) {
    throw Error(ErrorCode::InvalidArgument, "psi_bar must lie in [0, 2)");
  }
  if (c1.has_value() != c2.has_value()) {
    throw Error(ErrorCode::InvalidArgument, "c1 and c2 must be given together");
  }
  if (!(divergence_limit > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "divergence limit must be positive");
  }
  trajectory.validate();
}

std::size_t SimConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

LyapunovTrace TraceLog::lyapunov() const {
  LyapunovTrace out;
  for (const TraceRow& row : rows) {
    out.t.push_back(row.t);
    out.v1.push_back(row.v1);
    out.v2.push_back(row.v2);
    out.v.push_back(row.v);
    out.z1.emplace_back(row.e_p.norm(), row.e_v.norm(), row.e_f.norm());
    out.z2.emplace_back(row.e_r.norm(), row.e_omega.norm(), row.e_m.norm());
    out.psi.push_back(row.psi);
  }
  return out;
}

std::string_view to_string(ErrorChannel channel) {
  switch (channel) {
    case ErrorChannel::Position: return "e_p";
    case ErrorChannel::Velocity: return "e_v";
    case ErrorChannel::Attitude: return "e_R";
    case ErrorChannel::AngularVelocity: return "e_omega";
    case ErrorChannel::Force: return "e_F";
    case ErrorChannel::Moment: return "e_M";
  }
  return "unknown";
}

const Vec3& error_of(const TraceRow& row, ErrorChannel channel) {
  switch (channel) {
    case ErrorChannel::Position: return row.e_p;
    case ErrorChannel::Velocity: return row.e_v;
    case ErrorChannel::Attitude: return row.e_r;
    case ErrorChannel::AngularVelocity: return row.e_omega;
    case ErrorChannel::Force: return row.e_f;
    case ErrorChannel::Moment: return row.e_m;
  }
  return row.e_p;
}

double rms_norm(const TraceLog& trace, ErrorChannel channel, double t_begin, double t_end) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const TraceRow& row : trace.rows) {
    if (row.t < t_begin || row.t > t_end) continue;
    sum += error_of(row, channel).squaredNorm();
    ++count;
  }
  return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

Metrics compute_metrics(const TraceLog& trace, double f_max, double mu) {
  Metrics m;
  if (trace.rows.empty()) return m;
  const std::size_t n = trace.rows.size();
  const std::size_t tail_begin = n - std::max<std::size_t>(1, n / 5);

  for (std::size_t c = 0; c < kErrorChannels.size(); ++c) {
    ErrorStats& s = m.errors[c];
    double sum = 0.0;
    double sum_tail = 0.0;
    std::vector<double> norms(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double e = error_of(trace.rows[k], kErrorChannels[c]).norm();
      norms[k] = e;
      sum += e * e;
      s.max = std::max(s.max, e);
      if (k >= tail_begin) {
        sum_tail += e * e;
        s.max_tail = std::max(s.max_tail, e);
      }
    }
    s.rms = std::sqrt(sum / static_cast<double>(n));
    s.rms_tail = std::sqrt(sum_tail / static_cast<double>(n - tail_begin));
    const double band = 0.05 * s.max;
    s.settle_time = trace.rows.front().t;
    for (std::size_t k = n; k-- > 0;) {
      if (norms[k] > band) {
        s.settle_time = k + 1 < n ? trace.rows[k + 1].t : trace.rows[k].t;
        break;
      }
    }
  }

  for (const TraceRow& row : trace.rows) {
    RotorBank bank{trace.model, row.rotors};
    const double peak = bank.thrusts(mu).cwiseAbs().maxCoeff();
    m.max_abs_thrust = std::max(m.max_abs_thrust, peak);
  }
  m.exceeded_f_max = m.max_abs_thrust > f_max;
  return m;
}

namespace {

Vec3 gaussian_vec(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0.0) return Vec3::Zero();
  std::normal_distribution<double> normal(0.0, sigma);
  return Vec3(normal(rng), normal(rng), normal(rng));
}

RigidBodyState perturbed_initial_state(const InitialCondition& ic, std::mt19937_64& rng) {
  RigidBodyState s;
  s.p = ic.position + gaussian_vec(rng, ic.position_sigma);
  s.v = ic.velocity + gaussian_vec(rng, ic.velocity_sigma);
  s.r = ic.attitude;
  if (ic.attitude_sigma > 0.0) {
    const Vec3 axis = gaussian_vec(rng, 1.0);
    std::normal_distribution<double> normal(0.0, ic.attitude_sigma);
    const double angle = normal(rng);
    if (axis.norm() > 0.0) s.r = ic.attitude * RotationMatrix::about_axis(axis, angle);
  }
  s.omega = ic.omega + gaussian_vec(rng, ic.omega_sigma);
  return s;
}

Eigen::VectorXd speeds_from_thrusts(const Eigen::VectorXd& thrusts, double mu) {
  return thrusts.unaryExpr([mu](double f) { return thrust_to_speed(f, mu); });
}

bool diverged(const StateBundle& y, double limit) {
  const auto& b = y.body;
  const bool finite = b.p.allFinite() && b.v.allFinite() && b.omega.allFinite() &&
                      b.r.matrix().allFinite() && y.rotors.allFinite();
  return !finite || b.p.norm() > limit || b.v.norm() > limit || b.omega.norm() > limit ||
         y.rotors.cwiseAbs().maxCoeff() > limit;
}

double default_psi_bar(double psi0) {
  constexpr double kCeiling = 2.0 - 1e-9;
  return std::min(std::max(psi0, 1.9), kCeiling);
}

}  // namespace

ScenarioResult run_scenario(const SimConfig& config, const VehicleParams& params,
                            const Gains& gains) {
  config.validate();
  params.validate();
  gains.validate();
  const AllocationMatrix allocation = build_allocation(params.geometry);
  const auto n = static_cast<Eigen::Index>(allocation.rotor_count());

  ScenarioResult result;
  std::mt19937_64 rng(config.seed);
  StateBundle y;
  y.body = perturbed_initial_state(config.initial, rng);

  const TrajectorySpec& traj = config.trajectory;
  const TrajectorySample sample0 = sample_trajectory(0.0, traj);
  const double psi0 = psi(y.body.r, sample0.r_d);
  if (psi0 >= 2.0 - 1e-12) {
    result.warnings.push_back("initial attitude error is 180 degrees; outside the region of attraction");
  }
  result.psi_bar = config.psi_bar.value_or(default_psi_bar(psi0));

  // Design constants and certificates.
  std::optional<double> c1 = config.c1;
  std::optional<double> c2 = config.c2;
  if (!c1) {
    if (auto found = find_feasible_constants(gains, params.mass, params.inertia, params.alpha,
                                             result.psi_bar)) {
      c1 = found->c1;
      c2 = found->c2;
    }
  }
  if (c1) {
    result.gain_report = validate_gains(gains, *c1, *c2, params.mass, params.inertia);
    result.translational =
        build_translational_certificate(gains.kp, gains.kv, *c1, params.mass, params.alpha);
    result.rotational = build_rotational_certificate(gains.k_r, gains.k_omega, *c2,
                                                     params.inertia, params.alpha, result.psi_bar);
  }
  const bool certified = c1 && result.gain_report.valid() && result.translational->valid &&
                         result.rotational->valid;
  if (!certified) {
    if (!config.force) {
      throw Error(ErrorCode::GainInfeasible,
                  c1 ? "gains fail the certificate conditions for the given c1, c2"
                     : "no design constants c1, c2 certify these gains");
    }
    result.warnings.push_back("gains are not certified; running anyway (--force)");
  }

  // Initial rotor state.
  {
    const TrackingErrors e0 = tracking_errors(y.body, sample0);
    Eigen::VectorXd thrusts = Eigen::VectorXd::Zero(n);
    if (config.initial.warm_start) {
      Wrench w;
      w.head<3>() = desired_force(e0.e_p, e0.e_v, y.body.r, sample0.a_d, gains, params.mass,
                                  params.gravity);
      w.tail<3>() = desired_moment(e0.e_r, e0.e_omega, y.body.omega, y.body.r, sample0.r_d,
                                   sample0.omega_d, sample0.omegadot_d, gains, params.inertia);
      thrusts = allocate(w, allocation);
    }
    if (config.initial.thrust_sigma > 0.0) {
      std::normal_distribution<double> normal(0.0, config.initial.thrust_sigma);
      for (Eigen::Index i = 0; i < n; ++i) thrusts(i) += normal(rng);
    }
    y.rotors = config.plant_model == RotorModel::ThrustDynamics
                   ? thrusts
                   : speeds_from_thrusts(thrusts, params.mu);
  }

  ControllerState controller;
  controller.mode = config.controller_mode;
  const double control_dt = config.dt * config.control_decimation;
  const std::size_t steps = config.step_count();

  TraceLog& trace = result.trace;
  trace.model = config.plant_model;
  trace.rotor_count = allocation.rotor_count();
  trace.rows.reserve(steps + 1);

  const double c1v = c1.value_or(0.0);
  const double c2v = c2.value_or(0.0);
  Eigen::VectorXd thrust_cmd = Eigen::VectorXd::Zero(n);
  ControlOutput held;

  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    const TrajectorySample sample = sample_trajectory(t, traj);

    if (k % static_cast<std::size_t>(config.control_decimation) == 0) {
      held = control_step(y.body, sample, gains, params, controller, control_dt);
      Wrench w_cmd;
      w_cmd << held.force_cmd, held.moment_cmd;
      thrust_cmd = allocate(w_cmd, allocation);
    }

    TraceRow row;
    row.t = t;
    row.state = y.body;
    row.rotors = y.rotors;
    const TrackingErrors e = tracking_errors(y.body, sample);
    row.e_p = e.e_p;
    row.e_v = e.e_v;
    row.e_r = e.e_r;
    row.e_omega = e.e_omega;
    row.force_d = desired_force(e.e_p, e.e_v, y.body.r, sample.a_d, gains, params.mass,
                                params.gravity);
    row.moment_d = desired_moment(e.e_r, e.e_omega, y.body.omega, y.body.r, sample.r_d,
                                  sample.omega_d, sample.omegadot_d, gains, params.inertia);
    const Wrench w = allocation.apply(RotorBank{config.plant_model, y.rotors}.thrusts(params.mu));
    row.force = w.head<3>();
    row.moment = w.tail<3>();
    row.force_cmd = held.force_cmd;
    row.moment_cmd = held.moment_cmd;
    row.e_f = row.force - row.force_d;
    row.e_m = row.moment - row.moment_d;
    row.psi = psi(y.body.r, sample.r_d);
    row.v1 = v1(row.e_p, row.e_v, row.e_f, gains.kp, params.mass, params.alpha, c1v);
    row.v2 = v2(row.e_r, row.e_omega, row.e_m, row.psi, gains.k_r, params.inertia, params.alpha,
                c2v);
    row.v = row.v1 + row.v2;
    trace.rows.push_back(std::move(row));

    if (k == steps) break;

    auto derivative = [&](const StateBundle& s) {
      const PlantDerivative d =
          plant_derivative(s.body, RotorBank{config.plant_model, s.rotors}, thrust_cmd, params,
                           allocation);
      return BundleDerivative{d.body.p_dot, d.body.v_dot, d.body.omega, d.body.omega_dot,
                              d.rotor_dot};
    };
    y = rk4_step(y, derivative, config.dt);
    if (diverged(y, config.divergence_limit)) {
      throw DivergenceError("state norm exceeded divergence limit at t = " +
                                std::to_string(t + config.dt) + " s",
                            std::move(trace));
    }
  }

  result.metrics = compute_metrics(trace, params.f_max, params.mu);
  if (certified) {
    result.metrics.decay =
        verify_decay(trace.lyapunov(), *result.translational, *result.rotational);
  }
  return result;
}

ComparisonReport compare_controllers(const SimConfig& config, const VehicleParams& params,
                                     const Gains& gains) {
  SimConfig proposed = config;
  proposed.controller_mode = ControllerMode::Proposed;
  SimConfig conventional = config;
  conventional.controller_mode = ControllerMode::Conventional;

  auto future = std::async(std::launch::async,
                           [&] { return run_scenario(conventional, params, gains); });
  ComparisonReport report;
  report.proposed = run_scenario(proposed, params, gains);
  report.conventional = future.get();

  for (std::size_t c = 0; c < kErrorChannels.size(); ++c) {
    const ErrorStats& p = report.proposed.metrics.errors[c];
    const ErrorStats& q = report.conventional.metrics.errors[c];
    report.rms_ratio[c] = p.rms > 0.0 ? q.rms / p.rms : 0.0;
    report.rms_ratio_tail[c] = p.rms_tail > 0.0 ? q.rms_tail / p.rms_tail : 0.0;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Actuator experiments

StepResponseTrace step_response_experiment(double alpha_f, double alpha_m, double dt,
                                           double duration, double mu, double f_max) {
  if (!(alpha_f > 0.0 && alpha_m > 0.0 && dt > 0.0 && duration > 0.0 && mu > 0.0 &&
        f_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "step response parameters must be positive");
  }
  StepResponseTrace out;
  out.alpha_f = alpha_f;
  out.alpha_m = alpha_m;

  const double speed_cmd = thrust_to_speed(f_max, mu);
  auto rk4 = [dt](double x, auto&& f) {
    const double k1 = f(x);
    const double k2 = f(x + 0.5 * dt * k1);
    const double k3 = f(x + 0.5 * dt * k2);
    const double k4 = f(x + dt * k3);
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  auto td = [&](double f) { return td_derivative(f, f_max, alpha_f); };
  auto dcmd = [&](double w) { return dcmd_derivative(w, speed_cmd, alpha_m); };

  double thrust = 0.0;
  double speed = 0.0;
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  for (std::size_t k = 0; k <= steps; ++k) {
    out.t.push_back(static_cast<double>(k) * dt);
    out.td.push_back(thrust / f_max);
    out.dcmd.push_back(aero_thrust(speed, mu) / f_max);
    out.dcmd_speed.push_back(speed / speed_cmd);
    thrust = rk4(thrust, td);
    speed = rk4(speed, dcmd);
  }
  return out;
}

ForceTrackTrace force_track_experiment(const ForceTrackConfig& config) {
  config.params.validate();
  if (!(config.dt > 0.0 && config.duration >= config.dt)) {
    throw Error(ErrorCode::InvalidArgument, "force tracking needs dt > 0 and duration >= dt");
  }
  TrajectorySpec spec;
  spec.kind = TrajectoryKind::ForceSine;
  spec.amplitude = config.amplitude;
  spec.frequency = config.frequency;
  spec.validate();

  const VehicleParams& params = config.params;
  const AllocationMatrix allocation = build_allocation(params.geometry);
  const auto n = static_cast<Eigen::Index>(allocation.rotor_count());

  // Clamped vehicle: only the rotor states evolve.
  StateBundle y;
  y.rotors = Eigen::VectorXd::Zero(n);
  ControllerState controller;
  controller.mode = config.mode;

  ForceTrackTrace out;
  out.mode = config.mode;
  const auto steps = static_cast<std::size_t>(std::llround(config.duration / config.dt));
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    const ForceSample desired = force_sine(t, spec);
    const Vec3 force_d(0.0, 0.0, desired.force);
    const Vec3 force_cmd = commanded_force(force_d, controller, params.alpha, config.dt);
    const Vec3 moment_cmd = commanded_moment(Vec3::Zero(), controller, params.alpha, config.dt);
    Wrench w_cmd;
    w_cmd << force_cmd, moment_cmd;
    const Eigen::VectorXd thrust_cmd = allocate(w_cmd, allocation);

    const Wrench w = allocation.apply(RotorBank{config.plant_model, y.rotors}.thrusts(params.mu));
    out.t.push_back(t);
    out.fz_d.push_back(desired.force);
    out.fz_d_rate.push_back(desired.rate);
    out.fz_cmd.push_back(force_cmd.z());
    out.fz.push_back(w(2));
    if (k == steps) break;

    auto derivative = [&](const StateBundle& s) {
      BundleDerivative d;
      d.rotor_dot = plant_derivative(s.body, RotorBank{config.plant_model, s.rotors}, thrust_cmd,
                                     params, allocation)
                        .rotor_dot;
      return d;
    };
    StateBundle next = rk4_step(y, derivative, config.dt);
    y.rotors = next.rotors;
  }
  return out;
}

ForceTrackStats analyze_force_tracking(const ForceTrackTrace& trace, double amplitude,
                                       double frequency, double t_from) {
  ForceTrackStats stats;
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < trace.t.size(); ++k) {
    if (trace.t[k] >= t_from) idx.push_back(k);
  }
  if (idx.size() < 3) throw Error(ErrorCode::InvalidArgument, "too few samples to analyze");

  Eigen::MatrixXd basis(static_cast<Eigen::Index>(idx.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const std::size_t k = idx[j];
    const auto row = static_cast<Eigen::Index>(j);
    basis(row, 0) = std::sin(frequency * trace.t[k]);
    basis(row, 1) = std::cos(frequency * trace.t[k]);
    basis(row, 2) = 1.0;
    y(row) = trace.fz[k];
    stats.max_abs_error = std::max(stats.max_abs_error, std::abs(trace.fz[k] - trace.fz_d[k]));
  }
  const Eigen::Vector3d coef = basis.colPivHouseholderQr().solve(y);
  // F_z ~ a sin(nu t) + b cos(nu t) = |.| sin(nu t + phi)
  stats.amplitude_ratio = std::hypot(coef(0), coef(1)) / amplitude;
  stats.phase_lag = -std::atan2(coef(1), coef(0));
  return stats;
}

}  // namespace omnirotor
