#include "omnirotor/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "omnirotor/error.hpp"
#include "omnirotor/trace_io.hpp"

namespace omnirotor::cli {

namespace {

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::GainInfeasible: return kExitInfeasible;
    case ErrorCode::NumericalDivergence: return kExitDivergence;
    case ErrorCode::ConfigParse:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NonPositiveConstant:
    case ErrorCode::RankDeficient:
    case ErrorCode::DimensionMismatch:
      return kExitConfig;
    default: return kExitFailure;
  }
}

// Runs `body`, mapping library errors onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigParse, "cannot open output file '" + path + "'");
  return out;
}

std::string num(double x, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

void print_gain_report(std::ostream& out, const GainReport& r) {
  out << "gain conditions (c1 = " << num(r.c1) << ", c2 = " << num(r.c2) << ")\n"
      << "  kp      > " << num(r.kp_bound) << (r.kp_ok ? "  ok" : "  FAIL") << '\n'
      << "  kv      > " << num(r.kv_bound) << (r.kv_ok ? "  ok" : "  FAIL") << '\n'
      << "  k_R     > " << num(r.k_r_bound) << (r.k_r_ok ? "  ok" : "  FAIL") << '\n'
      << "  k_omega > " << num(r.k_omega_bound) << (r.k_omega_ok ? "  ok" : "  FAIL") << '\n';
}

void print_certificates(std::ostream& out, const TranslationalCertificate& t,
                        const RotationalCertificate& r) {
  out << "certificates (decay rates are derived bounds, not measured)\n"
      << "  translational: valid = " << (t.valid ? "yes" : "no")
      << ", min eig M11 = " << num(min_eigenvalue(t.m11))
      << ", M12 = " << num(min_eigenvalue(t.m12)) << ", W1 = " << num(min_eigenvalue(t.w1))
      << ", decay rate = " << num(t.decay_rate) << " 1/s\n"
      << "  rotational:    valid = " << (r.valid ? "yes" : "no")
      << ", psi_bar = " << num(r.psi_bar) << ", min eig M21 = " << num(min_eigenvalue(r.m21))
      << ", M22 = " << num(min_eigenvalue(r.m22)) << ", W2 = " << num(min_eigenvalue(r.w2))
      << ", decay rate = " << num(r.decay_rate) << " 1/s\n"
      << "  region of attraction: Psi(R, R_d) < 2 (almost global)\n";
}

void print_metrics(std::ostream& out, const Metrics& m) {
  out << "metrics            rms          max          rms(last 20%) max(last 20%) settle[s]\n";
  for (std::size_t c = 0; c < kErrorChannels.size(); ++c) {
    const ErrorStats& s = m.errors[c];
    char line[160];
    std::snprintf(line, sizeof line, "  %-8s %12.5g %12.5g %12.5g %12.5g %10.4g\n",
                  std::string(to_string(kErrorChannels[c])).c_str(), s.rms, s.max, s.rms_tail,
                  s.max_tail, s.settle_time);
    out << line;
  }
  out << "  max |f_i| = " << num(m.max_abs_thrust) << " N"
      << (m.exceeded_f_max ? " (exceeds f_max)" : "") << '\n';
  if (m.decay) {
    const DecayReport& d = *m.decay;
    out << "lyapunov decay: beta = " << num(d.beta) << " 1/s, envelope "
        << (d.envelope_ok ? "ok" : "VIOLATED") << ", monotone "
        << (d.monotone_ok ? "ok" : "VIOLATED") << ", worst V/(V0 e^-bt) = "
        << num(d.worst_envelope_ratio) << '\n';
    if (d.first_envelope_violation) {
      out << "  first envelope violation at t = " << num(*d.first_envelope_violation) << " s\n";
    }
    if (d.first_monotone_violation) {
      out << "  first monotonicity violation at t = " << num(*d.first_monotone_violation) << " s\n";
    }
  } else {
    out << "lyapunov decay: not evaluated (no certificate)\n";
  }
}

std::string summary_text(const RunConfig& config, const ScenarioResult& result) {
  std::ostringstream s;
  s << "# effective configuration\n" << format_config(config) << '\n';
  print_gain_report(s, result.gain_report);
  if (result.translational && result.rotational) {
    print_certificates(s, *result.translational, *result.rotational);
  }
  print_metrics(s, result.metrics);
  for (const std::string& w : result.warnings) s << "warning: " << w << '\n';
  return s.str();
}

}  // namespace

RunConfig effective_config(const Options& options) {
  RunConfig config = options.config_path ? load_config(*options.config_path) : RunConfig{};
  if (options.out_path) config.output_path = *options.out_path;
  if (options.mode) config.sim.controller_mode = *options.mode;
  if (options.dt) config.sim.dt = *options.dt;
  if (options.duration) config.sim.duration = *options.duration;
  if (options.seed) config.sim.seed = *options.seed;
  if (options.force) config.sim.force = true;
  validate(config);
  return config;
}

int cmd_simulate(const Options& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = effective_config(options);
    ScenarioResult result;
    try {
      result = run_scenario(config.sim, config.vehicle, config.gains);
    } catch (const DivergenceError& e) {
      std::ofstream csv = open_output(config.output_path);
      write_trace_csv(csv, e.partial_trace());
      err << "partial trace written to " << config.output_path << '\n';
      throw;
    }
    std::ofstream csv = open_output(config.output_path);
    write_trace_csv(csv, result.trace);
    const std::string summary = summary_text(config, result);
    std::ofstream(config.output_path + ".summary.txt") << summary;
    out << summary << "trace written to " << config.output_path << '\n';
    return kExitOk;
  });
}

int cmd_check_gains(const Options& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = effective_config(options);
    const VehicleParams& v = config.vehicle;
    const double psi_bar = config.sim.psi_bar.value_or(1.9);

    double c1 = 0.0;
    double c2 = 0.0;
    if (config.sim.c1 && config.sim.c2) {
      c1 = *config.sim.c1;
      c2 = *config.sim.c2;
      out << "design constants from config\n";
    } else if (auto found = find_feasible_constants(config.gains, v.mass, v.inertia, v.alpha,
                                                    psi_bar)) {
      c1 = found->c1;
      c2 = found->c2;
      out << "design constants from grid search\n";
    } else {
      out << "no design constants c1, c2 certify these gains\n";
      return kExitInfeasible;
    }
    const GainReport report = validate_gains(config.gains, c1, c2, v.mass, v.inertia);
    print_gain_report(out, report);
    const auto t = build_translational_certificate(config.gains.kp, config.gains.kv, c1, v.mass, v.alpha);
    const auto r = build_rotational_certificate(config.gains.k_r, config.gains.k_omega, c2,
                                                v.inertia, v.alpha, psi_bar);
    print_certificates(out, t, r);
    const bool feasible = report.valid() && t.valid && r.valid;
    out << "feasible: " << (feasible ? "yes" : "no") << '\n';
    return feasible ? kExitOk : kExitInfeasible;
  });
}

int cmd_step_response(const Options& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = effective_config(options);
    const double dt = options.dt.value_or(1e-4);
    const double duration = options.duration.value_or(1.0);
    const StepResponseTrace trace =
        step_response_experiment(options.alpha_f, options.alpha_m, dt, duration,
                                 config.vehicle.mu, config.vehicle.f_max);
    const std::string path = options.out_path.value_or("step_response.csv");
    std::ofstream csv = open_output(path);
    write_step_response_csv(csv, trace);
    out << "step response (alpha_f = " << options.alpha_f << " s, alpha_m = " << options.alpha_m
        << " s) written to " << path << '\n';
    return kExitOk;
  });
}

int cmd_force_track(const Options& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = effective_config(options);
    ForceTrackConfig base;
    base.params = config.vehicle;
    base.params.alpha = options.alpha_f;
    base.amplitude = options.amplitude;
    base.frequency = options.frequency;
    base.dt = options.dt.value_or(1e-3);
    base.duration = options.duration.value_or(6.0);

    std::vector<ControllerMode> modes{ControllerMode::Proposed, ControllerMode::Conventional};
    if (options.mode) modes = {*options.mode};
    std::vector<ForceTrackTrace> runs;
    const double settle = 5.0 * base.params.alpha;
    out << "force tracking: F_z,d = " << base.amplitude << " sin(" << num(base.frequency)
        << " t), alpha = " << base.params.alpha << " s\n";
    for (ControllerMode mode : modes) {
      ForceTrackConfig cfg = base;
      cfg.mode = mode;
      runs.push_back(force_track_experiment(cfg));
      const ForceTrackStats s =
          analyze_force_tracking(runs.back(), base.amplitude, base.frequency, settle);
      out << "  " << std::left << std::setw(13) << to_string(mode) << std::right
          << " max |error| after " << num(settle) << " s = " << num(s.max_abs_error)
          << " N, amplitude ratio = " << num(s.amplitude_ratio)
          << ", phase lag = " << num(s.phase_lag) << " rad\n";
    }
    const std::string path = options.out_path.value_or("force_track.csv");
    std::ofstream csv = open_output(path);
    write_force_track_csv(csv, runs);
    out << "written to " << path << '\n';
    return kExitOk;
  });
}

int cmd_compare(const Options& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = effective_config(options);
    const ComparisonReport report = compare_controllers(config.sim, config.vehicle, config.gains);

    out << "# effective configuration\n" << format_config(config) << '\n';
    out << "channel        rms proposed  rms conventional  ratio   tail proposed  tail conventional  ratio\n";
    for (std::size_t c = 0; c < kErrorChannels.size(); ++c) {
      const ErrorStats& p = report.proposed.metrics.errors[c];
      const ErrorStats& q = report.conventional.metrics.errors[c];
      char line[200];
      std::snprintf(line, sizeof line, "  %-8s %14.5g %17.5g %7.3f %15.5g %18.5g %7.3f\n",
                    std::string(to_string(kErrorChannels[c])).c_str(), p.rms, q.rms,
                    report.rms_ratio[c], p.rms_tail, q.rms_tail, report.rms_ratio_tail[c]);
      out << line;
    }
    if (options.out_path) {
      std::filesystem::path stem(*options.out_path);
      if (stem.extension() == ".csv") stem.replace_extension();
      const std::string proposed = stem.string() + ".proposed.csv";
      const std::string conventional = stem.string() + ".conventional.csv";
      std::ofstream a = open_output(proposed);
      write_trace_csv(a, report.proposed.trace);
      std::ofstream b = open_output(conventional);
      write_trace_csv(b, report.conventional.trace);
      out << "traces written to " << proposed << " and " << conventional << '\n';
    }
    return kExitOk;
  });
}

}  // namespace omnirotor::cli
