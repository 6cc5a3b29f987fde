#include "omnirotor/trace_io.hpp"

#include <cstdio>

#include "omnirotor/config.hpp"
#include "omnirotor/error.hpp"

namespace omnirotor {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void add_vec(std::vector<std::string>& cols, const std::string& name, const std::string& unit) {
  for (const char* axis : {"x", "y", "z"}) cols.push_back(name + "_" + axis + "[" + unit + "]");
}

void put(std::ostream& out, double x, bool& first) {
  if (!first) out << ',';
  first = false;
  out << format_double(x);
}

void put(std::ostream& out, const Vec3& v, bool& first) {
  for (int i = 0; i < 3; ++i) put(out, v(i), first);
}

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

}  // namespace

std::vector<std::string> trace_csv_header(std::size_t rotor_count, RotorModel model) {
  std::vector<std::string> cols{"t[s]"};
  add_vec(cols, "p", "m");
  add_vec(cols, "v", "m/s");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) cols.push_back("R_" + std::to_string(r) + std::to_string(c) + "[-]");
  }
  add_vec(cols, "omega", "rad/s");
  const std::string rotor_unit = model == RotorModel::ThrustDynamics ? "N" : "rad/s";
  const std::string rotor_name = model == RotorModel::ThrustDynamics ? "thrust_" : "speed_";
  for (std::size_t i = 0; i < rotor_count; ++i) {
    cols.push_back(rotor_name + std::to_string(i) + "[" + rotor_unit + "]");
  }
  add_vec(cols, "e_p", "m");
  add_vec(cols, "e_v", "m/s");
  add_vec(cols, "e_R", "-");
  add_vec(cols, "e_omega", "rad/s");
  add_vec(cols, "e_F", "N");
  add_vec(cols, "e_M", "N*m");
  add_vec(cols, "F", "N");
  add_vec(cols, "M", "N*m");
  add_vec(cols, "F_cmd", "N");
  add_vec(cols, "M_cmd", "N*m");
  add_vec(cols, "F_d", "N");
  add_vec(cols, "M_d", "N*m");
  for (const char* name : {"V1[J]", "V2[J]", "V[J]", "psi[-]"}) cols.emplace_back(name);
  return cols;
}

void write_trace_csv(std::ostream& out, const TraceLog& trace) {
  write_header(out, trace_csv_header(trace.rotor_count, trace.model));
  for (const TraceRow& row : trace.rows) {
    bool first = true;
    put(out, row.t, first);
    put(out, row.state.p, first);
    put(out, row.state.v, first);
    for (int k = 0; k < 9; ++k) put(out, row.state.r(k / 3, k % 3), first);
    put(out, row.state.omega, first);
    for (Eigen::Index i = 0; i < row.rotors.size(); ++i) put(out, row.rotors(i), first);
    for (const Vec3* v : {&row.e_p, &row.e_v, &row.e_r, &row.e_omega, &row.e_f, &row.e_m,
                          &row.force, &row.moment, &row.force_cmd, &row.moment_cmd, &row.force_d,
                          &row.moment_d}) {
      put(out, *v, first);
    }
    for (double x : {row.v1, row.v2, row.v, row.psi}) put(out, x, first);
    out << '\n';
  }
}

void write_step_response_csv(std::ostream& out, const StepResponseTrace& trace) {
  write_header(out, {"t[s]", "td_thrust[-]", "dcmd_thrust[-]", "dcmd_speed[-]"});
  for (std::size_t k = 0; k < trace.t.size(); ++k) {
    bool first = true;
    for (double x : {trace.t[k], trace.td[k], trace.dcmd[k], trace.dcmd_speed[k]}) {
      put(out, x, first);
    }
    out << '\n';
  }
}

void write_force_track_csv(std::ostream& out, const std::vector<ForceTrackTrace>& runs) {
  if (runs.empty()) throw Error(ErrorCode::InvalidArgument, "no force tracking runs to write");
  std::vector<std::string> cols{"t[s]", "fz_d[N]"};
  for (const ForceTrackTrace& run : runs) {
    if (run.t.size() != runs.front().t.size()) {
      throw Error(ErrorCode::DimensionMismatch, "force tracking runs use different time grids");
    }
    const std::string mode(to_string(run.mode));
    cols.push_back("fz_cmd_" + mode + "[N]");
    cols.push_back("fz_" + mode + "[N]");
  }
  write_header(out, cols);
  const ForceTrackTrace& ref = runs.front();
  for (std::size_t k = 0; k < ref.t.size(); ++k) {
    bool first = true;
    put(out, ref.t[k], first);
    put(out, ref.fz_d[k], first);
    for (const ForceTrackTrace& run : runs) {
      put(out, run.fz_cmd[k], first);
      put(out, run.fz[k], first);
    }
    out << '\n';
  }
}

}  // namespace omnirotor
