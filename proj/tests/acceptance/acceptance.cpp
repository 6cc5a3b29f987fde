// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "omnirotor/allocation.hpp"
#include "omnirotor/controller.hpp"
#include "omnirotor/geometry.hpp"
#include "omnirotor/sim.hpp"
#include "omnirotor/stability.hpp"

using namespace omnirotor;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      const std::string so_far = detail.str();
      if (!so_far.empty() && so_far.back() != ' ') detail << ' ';
      detail << "FAILED(" << what << ") ";
    }
  }
};

const Gains kGains{3.0, 1.0, 1.0, 1.0};
const Mat3 kInertia = 0.03 * Mat3::Identity();
constexpr double kMass = 1.0;

std::size_t row_at(const TraceLog& trace, double t, double dt) {
  const auto k = static_cast<std::size_t>(std::llround(t / dt));
  return std::min(k, trace.rows.size() - 1);
}

RotationMatrix random_rotation(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(gen), n(gen), n(gen), n(gen));
  q.normalize();
  return RotationMatrix::from_matrix(q.toRotationMatrix(), 1e-12);
}

Vec3 random_vec(std::mt19937_64& gen, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  return Vec3(n(gen), n(gen), n(gen));
}

// 1. Gain feasibility and positive definite certificates.
void gain_feasibility(Outcome& o) {
  const GainReport report = validate_gains(kGains, 0.1, 0.01, kMass, kInertia);
  o.detail << "kp bound at c1=0.1: " << report.kp_bound;
  o.require(std::abs(report.kp_bound - 0.112) < 0.001 && report.kp_bound < kGains.kp, "c1 = 0.1 bound");
  for (double alpha : {0.07, 0.1}) {
    const auto found = find_feasible_constants(kGains, kMass, kInertia, alpha, 1.9);
    o.require(found.has_value(), "no constants for alpha");
    if (!found) continue;
    const Mat3 mats[6] = {found->translational.m11, found->translational.m12, found->translational.w1,
                          found->rotational.m21,    found->rotational.m22,    found->rotational.w2};
    double lowest = INFINITY;
    for (const Mat3& m : mats) lowest = std::min(lowest, min_eigenvalue(m));
    o.detail << "; alpha=" << alpha << ": c1=" << found->c1 << " c2=" << found->c2
             << " min eig=" << lowest;
    o.require(lowest > 1e-10, "eigenvalue");
    o.require(validate_gains(kGains, found->c1, found->c2, kMass, kInertia).valid(), "gain inequalities");
  }
}

// 2. Force and moment errors contract as exp(-t/alpha) under a matched TD plant.
void force_contraction(Outcome& o) {
  constexpr double dt = 2e-5;
  VehicleParams params;
  params.alpha = 0.1;
  double worst_f = 0.0, worst_m = 0.0;
  for (int i = 0; i < 20; ++i) {
    SimConfig c;
    c.dt = dt;
    c.duration = 3.0 * params.alpha + 10.0 * dt;
    c.seed = 1000 + static_cast<std::uint64_t>(i);
    c.trajectory.kind = TrajectoryKind::Hover;
    c.initial.position = c.trajectory.hover_position;
    c.initial.position_sigma = 0.2;
    c.initial.velocity_sigma = 0.2;
    c.initial.attitude_sigma = 0.3;
    c.initial.omega_sigma = 0.3;
    c.initial.thrust_sigma = 1.0;
    const ScenarioResult r = run_scenario(c, params, kGains);
    const TraceRow& first = r.trace.rows.front();
    for (int n = 1; n <= 3; ++n) {
      const TraceRow& row = r.trace.rows[row_at(r.trace, n * params.alpha, dt)];
      const double expected = std::exp(-row.t / params.alpha);
      worst_f = std::max(worst_f, std::abs(row.e_f.norm() / first.e_f.norm() / expected - 1.0));
      worst_m = std::max(worst_m, std::abs(row.e_m.norm() / first.e_m.norm() / expected - 1.0));
    }
  }
  o.detail << "dt=" << dt << " worst relative deviation e_F " << worst_f << ", e_M " << worst_m;
  o.require(worst_f <= 0.005, "e_F");
  o.require(worst_m <= 0.005, "e_M");
}

// 3. Circle-tumble convergence with the proposed controller.
void circle_convergence(Outcome& o) {
  SimConfig c;
  const auto start = std::chrono::steady_clock::now();
  const ScenarioResult r = run_scenario(c, VehicleParams{}, kGains);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const TraceLog& tr = r.trace;
  const TraceRow& at1 = tr.rows[row_at(tr, 1.0, c.dt)];
  for (ErrorChannel ch : kErrorChannels) {
    double late = 0.0;
    for (const TraceRow& row : tr.rows)
      if (row.t >= 8.0 - 1e-12) late = std::max(late, error_of(row, ch).norm());
    const double early = error_of(at1, ch).norm();
    o.detail << to_string(ch) << " " << early << "->" << late << "; ";
    o.require(late < early, std::string(to_string(ch)));
  }
  double psi_max = 0.0;
  for (const TraceRow& row : tr.rows) psi_max = std::max(psi_max, row.psi);
  o.detail << "max psi " << psi_max << "; ";
  o.require(psi_max < 2.0, "psi");
  o.require(r.metrics.decay.has_value() && r.metrics.decay->passed(), "verify_decay");
  if (r.metrics.decay) {
    o.detail << "beta " << r.metrics.decay->beta << " worst V ratio "
             << r.metrics.decay->worst_envelope_ratio << "; ";
  }
  o.detail << "runtime " << seconds << " s";
  o.require(seconds <= 10.0, "runtime");
}

// 4. Proposed beats conventional on the DCMD plant.
void proposed_beats_conventional(Outcome& o) {
  SimConfig c;
  c.plant_model = RotorModel::MotorDynamics;
  VehicleParams params;
  params.alpha = 0.1;
  params.alpha_m = 0.1;
  const ComparisonReport rep = compare_controllers(c, params, kGains);
  const double t0 = c.duration - 5.0, t1 = c.duration;
  for (ErrorChannel ch : {ErrorChannel::Position, ErrorChannel::Velocity, ErrorChannel::Attitude,
                          ErrorChannel::AngularVelocity}) {
    const double p = rms_norm(rep.proposed.trace, ch, t0, t1);
    const double q = rms_norm(rep.conventional.trace, ch, t0, t1);
    o.detail << to_string(ch) << " " << p << " vs " << q << "; ";
    o.require(p < q, std::string(to_string(ch)));
  }
  int changes = 0;
  double last = 0.0;
  for (const TraceRow& row : rep.conventional.trace.rows) {
    if (row.t < t0 - 1e-12) continue;
    const double x = row.e_r.x();
    if (x != 0.0) {
      if (last != 0.0 && (x > 0.0) != (last > 0.0)) ++changes;
      last = x;
    }
  }
  o.detail << "conventional e_R_x sign changes " << changes;
  o.require(changes >= 3, "oscillation");
}

// 5. Single-axis sinusoidal force tracking.
void force_tracking(Outcome& o) {
  ForceTrackConfig cfg;
  cfg.params.alpha = 0.07;
  cfg.amplitude = 16.0;
  cfg.frequency = 4.0 * std::numbers::pi / 3.0;
  const ForceTrackStats p = analyze_force_tracking(force_track_experiment(cfg), 16.0, cfg.frequency, 0.35);
  cfg.mode = ControllerMode::Conventional;
  const ForceTrackStats q = analyze_force_tracking(force_track_experiment(cfg), 16.0, cfg.frequency, 0.35);
  o.detail << "proposed max error " << p.max_abs_error << " N; conventional ratio " << q.amplitude_ratio
           << ", lag " << q.phase_lag << " rad";
  o.require(p.max_abs_error < 0.32, "proposed error");
  o.require(std::abs(q.amplitude_ratio - 0.960) <= 0.01, "amplitude ratio");
  o.require(std::abs(q.phase_lag - 0.286) <= 0.003, "phase lag");
}

// 6. Rotor step responses.
void step_response(Outcome& o) {
  constexpr double dt = 1e-4;
  const StepResponseTrace s = step_response_experiment(0.07, 0.1, dt, 1.0);
  auto at = [&](const std::vector<double>& v, double t) {
    return v[static_cast<std::size_t>(std::llround(t / dt))];
  };
  const double td = at(s.td, 0.07), dc = at(s.dcmd, 0.1);
  const double td_end = at(s.td, 1.0), dc_end = at(s.dcmd, 1.0);
  o.detail << "TD(alpha_f)=" << td << " DCMD(alpha_m)=" << dc << " TD(1)=" << td_end
           << " DCMD(1)=" << dc_end;
  o.require(std::abs(td - 0.632) <= 0.001, "TD at alpha_f");
  o.require(dc < 0.632, "DCMD at alpha_m");
  o.require(std::abs(td_end - 1.0) <= 1e-4, "TD steady state");
  o.require(std::abs(dc_end - 1.0) <= 1e-4, "DCMD steady state");
}

// 7. SO(3) error function properties.
void geometry_properties(Outcome& o) {
  std::mt19937_64 gen(7);
  const double psi_bar = 1.99;
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const RotationMatrix r = random_rotation(gen), rd = random_rotation(gen);
    const double p = psi(r, rd);
    const double e2 = attitude_error(r, rd).squaredNorm();
    if (p < 0.0 || p > 2.0) ++violations;
    if (0.5 * e2 > p + 1e-12) ++violations;
    if (p <= psi_bar && p > e2 / (2.0 - psi_bar) + 1e-12) ++violations;
  }
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const RotationMatrix r0 = random_rotation(gen), rd0 = random_rotation(gen);
    const Vec3 w = random_vec(gen, 1.0), wd = random_vec(gen, 1.0);
    const double t = std::uniform_real_distribution<double>(0.0, 3.0)(gen);
    auto r_at = [&](double s) { return r0 * exp_so3(s * w, 1.0); };
    auto rd_at = [&](double s) { return rd0 * exp_so3(s * wd, 1.0); };
    const double rate = (psi(r_at(t + h), rd_at(t + h)) - psi(r_at(t - h), rd_at(t - h))) / (2 * h);
    const Vec3 e_r = attitude_error(r_at(t), rd_at(t));
    const Vec3 e_w = angular_velocity_error(w, r_at(t), rd_at(t), wd);
    worst = std::max(worst, std::abs(rate - e_r.dot(e_w)));
  }
  o.detail << "bound violations " << violations << " in 1e4 pairs; worst psi-rate error " << worst
           << " (limit " << 10 * h << ")";
  o.require(violations == 0, "bounds");
  o.require(worst <= 10 * h, "psi rate");
}

// 8. Allocation right inverse and omnidirectionality.
void allocation_suite(Outcome& o) {
  const AllocationMatrix a = build_allocation(default_hex_config(0.15, 0.15));
  o.detail << "rank " << a.rank() << ", cond " << a.condition_number();
  o.require(a.rank() == 6, "rank");
  std::mt19937_64 gen(11);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Wrench w;
    w << random_vec(gen, 10.0), random_vec(gen, 1.0);
    const double res = (a.apply(allocate(w, a)) - w).cwiseAbs().maxCoeff() / (1.0 + w.norm());
    worst = std::max(worst, res);
  }
  o.detail << "; worst scaled residual " << worst;
  o.require(worst <= 1e-9, "residual");
  int failures = 0;
  double peak = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Wrench w;
    w << kMass * 9.81 * random_vec(gen, 1.0).normalized(), Vec3::Zero();
    try {
      const Eigen::VectorXd f = allocate(w, a);
      peak = std::max(peak, f.cwiseAbs().maxCoeff());
    } catch (const Error&) {
      ++failures;
    }
  }
  o.detail << "; gravity cancellation failures " << failures << ", peak rotor thrust " << peak << " N";
  o.require(failures == 0, "gravity cancellation");
}

// 9. Closed-loop error dynamics residuals from finite differences. The held
// command makes rotor rates jump at every sample, so each residual is formed
// over one hold interval: a forward difference balanced against the
// trapezoidal mean of the right-hand side.
void error_dynamics(Outcome& o) {
  SimConfig c;
  c.duration = 5.0;
  const VehicleParams params;
  const ScenarioResult r = run_scenario(c, params, kGains);
  const auto& rows = r.trace.rows;
  auto rhs_v = [&](const TraceRow& row) {
    return Vec3(kGains.kp * row.e_p + kGains.kv * row.e_v - row.state.r * row.e_f);
  };
  auto rhs_w = [&](const TraceRow& row) {
    return Vec3(kGains.k_r * row.e_r + kGains.k_omega * row.e_omega - row.e_m);
  };
  double worst_v = 0.0, worst_w = 0.0, t_v = 0.0, t_w = 0.0;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const TraceRow& a = rows[k];
    const TraceRow& b = rows[k + 1];
    const Vec3 rv = params.mass * (b.e_v - a.e_v) / c.dt + 0.5 * (rhs_v(a) + rhs_v(b));
    const Vec3 rw = params.inertia * (b.e_omega - a.e_omega) / c.dt + 0.5 * (rhs_w(a) + rhs_w(b));
    if (rv.norm() > worst_v) worst_v = rv.norm(), t_v = a.t;
    if (rw.norm() > worst_w) worst_w = rw.norm(), t_w = a.t;
  }
  o.detail << "max residual translational " << worst_v << " (t=" << t_v << "), rotational " << worst_w
           << " (t=" << t_w << ")";
  o.require(worst_v <= 1e-3, "translational");
  o.require(worst_w <= 1e-3, "rotational");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"1 gain feasibility", gain_feasibility},
      {"2 force/moment error contraction", force_contraction},
      {"3 circle-tumble convergence", circle_convergence},
      {"4 proposed beats conventional", proposed_beats_conventional},
      {"5 single-axis force tracking", force_tracking},
      {"6 rotor step response", step_response},
      {"7 geometry properties", geometry_properties},
      {"8 allocation", allocation_suite},
      {"9 error dynamics residuals", error_dynamics},
  };
  int failed = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " threw: " << e.what();
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%zu criteria, %d failed, %.1f s\n", criteria.size(), failed, seconds);
  return failed == 0 ? 0 : 1;
}
