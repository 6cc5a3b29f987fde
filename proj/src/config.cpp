#include "omnirotor/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "omnirotor/error.hpp"

namespace omnirotor {

std::string_view to_string(RotorModel model) {
  return model == RotorModel::ThrustDynamics ? "td" : "dcmd";
}

std::string_view to_string(ControllerMode mode) {
  return mode == ControllerMode::Proposed ? "proposed" : "conventional";
}

RotorModel parse_rotor_model(std::string_view text) {
  if (text == "td") return RotorModel::ThrustDynamics;
  if (text == "dcmd") return RotorModel::MotorDynamics;
  throw Error(ErrorCode::ConfigParse, "rotor model must be td or dcmd, got '" + std::string(text) + "'");
}

ControllerMode parse_controller_mode(std::string_view text) {
  if (text == "proposed") return ControllerMode::Proposed;
  if (text == "conventional") return ControllerMode::Conventional;
  throw Error(ErrorCode::ConfigParse,
              "controller mode must be proposed or conventional, got '" + std::string(text) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s) {
  s = trim(s);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigParse, "not a number: '" + std::string(s) + "'");
  }
  return value;
}

std::vector<double> parse_list(std::string_view s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    out.push_back(parse_double(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Vec3 parse_vec3(std::string_view s) {
  const auto v = parse_list(s);
  if (v.size() != 3) throw Error(ErrorCode::ConfigParse, "expected 3 comma-separated values");
  return Vec3(v[0], v[1], v[2]);
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(ErrorCode::ConfigParse, "not a boolean: '" + std::string(s) + "'");
}

std::uint64_t parse_uint(std::string_view s) {
  s = trim(s);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigParse, "not a non-negative integer: '" + std::string(s) + "'");
  }
  return value;
}

Mat3 parse_inertia(std::string_view s) {
  const auto v = parse_list(s);
  Mat3 j = Mat3::Zero();
  if (v.size() == 3) {
    j.diagonal() << v[0], v[1], v[2];
  } else if (v.size() == 9) {
    j << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  } else {
    throw Error(ErrorCode::ConfigParse, "inertia needs 3 (diagonal) or 9 values");
  }
  return j;
}

struct RotorEntry {
  std::optional<Vec3> position;
  std::optional<Vec3> axis;
  std::optional<int> spin;
};

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"vehicle.mass", [](RunConfig& c, std::string_view v) { c.vehicle.mass = parse_double(v); }},
      {"vehicle.gravity", [](RunConfig& c, std::string_view v) { c.vehicle.gravity = parse_double(v); }},
      {"vehicle.inertia", [](RunConfig& c, std::string_view v) { c.vehicle.inertia = parse_inertia(v); }},
      {"vehicle.alpha", [](RunConfig& c, std::string_view v) { c.vehicle.alpha = parse_double(v); }},
      {"vehicle.alpha_m", [](RunConfig& c, std::string_view v) { c.vehicle.alpha_m = parse_double(v); }},
      {"vehicle.mu", [](RunConfig& c, std::string_view v) { c.vehicle.mu = parse_double(v); }},
      {"vehicle.f_max", [](RunConfig& c, std::string_view v) { c.vehicle.f_max = parse_double(v); }},
      {"vehicle.torque_per_thrust",
       [](RunConfig& c, std::string_view v) { c.vehicle.geometry.torque_per_thrust = parse_double(v); }},
      {"geometry.arm_length",
       [](RunConfig& c, std::string_view v) { c.vehicle.geometry.arm_length = parse_double(v); }},
      {"geometry.directionality",
       [](RunConfig& c, std::string_view v) {
         v = trim(v);
         if (v == "bidirectional") {
           c.vehicle.geometry.directionality = Directionality::Bidirectional;
         } else if (v == "unidirectional") {
           c.vehicle.geometry.directionality = Directionality::Unidirectional;
         } else {
           throw Error(ErrorCode::ConfigParse, "directionality must be bidirectional or unidirectional");
         }
       }},
      {"gains.kp", [](RunConfig& c, std::string_view v) { c.gains.kp = parse_double(v); }},
      {"gains.kv", [](RunConfig& c, std::string_view v) { c.gains.kv = parse_double(v); }},
      {"gains.k_r", [](RunConfig& c, std::string_view v) { c.gains.k_r = parse_double(v); }},
      {"gains.k_omega", [](RunConfig& c, std::string_view v) { c.gains.k_omega = parse_double(v); }},
      {"certificate.c1", [](RunConfig& c, std::string_view v) { c.sim.c1 = parse_double(v); }},
      {"certificate.c2", [](RunConfig& c, std::string_view v) { c.sim.c2 = parse_double(v); }},
      {"certificate.psi_bar", [](RunConfig& c, std::string_view v) { c.sim.psi_bar = parse_double(v); }},
      {"sim.dt", [](RunConfig& c, std::string_view v) { c.sim.dt = parse_double(v); }},
      {"sim.duration", [](RunConfig& c, std::string_view v) { c.sim.duration = parse_double(v); }},
      {"sim.plant", [](RunConfig& c, std::string_view v) { c.sim.plant_model = parse_rotor_model(trim(v)); }},
      {"sim.mode",
       [](RunConfig& c, std::string_view v) { c.sim.controller_mode = parse_controller_mode(trim(v)); }},
      {"sim.seed", [](RunConfig& c, std::string_view v) { c.sim.seed = parse_uint(v); }},
      {"sim.control_decimation",
       [](RunConfig& c, std::string_view v) { c.sim.control_decimation = static_cast<int>(parse_uint(v)); }},
      {"sim.force", [](RunConfig& c, std::string_view v) { c.sim.force = parse_bool(v); }},
      {"sim.divergence_limit",
       [](RunConfig& c, std::string_view v) { c.sim.divergence_limit = parse_double(v); }},
      {"trajectory.type",
       [](RunConfig& c, std::string_view v) { c.sim.trajectory.kind = parse_trajectory_kind(trim(v)); }},
      {"trajectory.radius", [](RunConfig& c, std::string_view v) { c.sim.trajectory.radius = parse_double(v); }},
      {"trajectory.height", [](RunConfig& c, std::string_view v) { c.sim.trajectory.height = parse_double(v); }},
      {"trajectory.position_rate",
       [](RunConfig& c, std::string_view v) { c.sim.trajectory.position_rate = parse_double(v); }},
      {"trajectory.attitude_rate",
       [](RunConfig& c, std::string_view v) { c.sim.trajectory.attitude_rate = parse_double(v); }},
      {"trajectory.amplitude",
       [](RunConfig& c, std::string_view v) { c.sim.trajectory.amplitude = parse_double(v); }},
      {"trajectory.frequency",
       [](RunConfig& c, std::string_view v) { c.sim.trajectory.frequency = parse_double(v); }},
      {"trajectory.hover_position",
       [](RunConfig& c, std::string_view v) { c.sim.trajectory.hover_position = parse_vec3(v); }},
      {"trajectory.attitude_axis",
       [](RunConfig& c, std::string_view v) { c.sim.trajectory.attitude_axis = parse_vec3(v); }},
      {"trajectory.attitude_angle",
       [](RunConfig& c, std::string_view v) { c.sim.trajectory.attitude_angle = parse_double(v); }},
      {"init.position", [](RunConfig& c, std::string_view v) { c.sim.initial.position = parse_vec3(v); }},
      {"init.velocity", [](RunConfig& c, std::string_view v) { c.sim.initial.velocity = parse_vec3(v); }},
      {"init.attitude",
       [](RunConfig& c, std::string_view v) {
         const auto m = parse_list(v);
         if (m.size() != 9) throw Error(ErrorCode::ConfigParse, "init.attitude needs 9 row-major values");
         Mat3 r;
         r << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
         RotationMatrix::from_matrix(r, 1e-6);  // reject anything far from SO(3)
         c.sim.initial.attitude = is_rotation(r) ? RotationMatrix::from_matrix(r) : renormalize(r);
       }},
      {"init.omega", [](RunConfig& c, std::string_view v) { c.sim.initial.omega = parse_vec3(v); }},
      {"init.warm_start", [](RunConfig& c, std::string_view v) { c.sim.initial.warm_start = parse_bool(v); }},
      {"init.position_sigma",
       [](RunConfig& c, std::string_view v) { c.sim.initial.position_sigma = parse_double(v); }},
      {"init.velocity_sigma",
       [](RunConfig& c, std::string_view v) { c.sim.initial.velocity_sigma = parse_double(v); }},
      {"init.attitude_sigma",
       [](RunConfig& c, std::string_view v) { c.sim.initial.attitude_sigma = parse_double(v); }},
      {"init.omega_sigma",
       [](RunConfig& c, std::string_view v) { c.sim.initial.omega_sigma = parse_double(v); }},
      {"init.thrust_sigma",
       [](RunConfig& c, std::string_view v) { c.sim.initial.thrust_sigma = parse_double(v); }},
      {"output.path", [](RunConfig& c, std::string_view v) { c.output_path = std::string(trim(v)); }},
  };
  return table;
}

// rotor.<index>.<field>
bool parse_rotor_key(std::string_view key, std::size_t& index, std::string_view& field) {
  constexpr std::string_view prefix = "rotor.";
  if (key.substr(0, prefix.size()) != prefix) return false;
  key.remove_prefix(prefix.size());
  const std::size_t dot = key.find('.');
  if (dot == std::string_view::npos || dot == 0) return false;
  const std::string_view digits = key.substr(0, dot);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return false;
  field = key.substr(dot + 1);
  return true;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt(const Vec3& v) { return fmt(v.x()) + ", " + fmt(v.y()) + ", " + fmt(v.z()); }

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::map<std::size_t, RotorEntry> rotors;
  std::set<std::string, std::less<>> seen;
  bool arm_length_given = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ConfigParse, where + "expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.insert(std::string(key)).second) {
      throw Error(ErrorCode::ConfigParse, where + "duplicate key '" + std::string(key) + "'");
    }
    try {
      std::size_t index = 0;
      std::string_view field;
      if (parse_rotor_key(key, index, field)) {
        RotorEntry& r = rotors[index];
        if (field == "position") {
          r.position = parse_vec3(value);
        } else if (field == "axis") {
          r.axis = parse_vec3(value);
        } else if (field == "spin") {
          const double s = parse_double(value);
          if (s != 1.0 && s != -1.0) throw Error(ErrorCode::ConfigParse, "spin must be 1 or -1");
          r.spin = static_cast<int>(s);
        } else {
          throw Error(ErrorCode::ConfigParse, "unknown rotor field '" + std::string(field) + "'");
        }
      } else if (auto it = setters().find(key); it != setters().end()) {
        it->second(config, value);
        if (key == "geometry.arm_length") arm_length_given = true;
      } else {
        throw Error(ErrorCode::ConfigParse, "unknown key '" + std::string(key) + "'");
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigParse, where + e.what());
    }
    if (end == text.size()) break;
  }

  RotorGeometry& g = config.vehicle.geometry;
  if (!rotors.empty()) {
    config.inline_geometry = true;
    g.rotors.clear();
    std::size_t expected = 0;
    for (const auto& [index, entry] : rotors) {
      const std::string tag = "rotor." + std::to_string(index) + ": ";
      if (index != expected++) {
        throw Error(ErrorCode::ConfigParse, tag + "rotor indices must be contiguous from 0");
      }
      if (!entry.position || !entry.axis || !entry.spin) {
        throw Error(ErrorCode::ConfigParse, tag + "needs position, axis and spin");
      }
      if (entry.axis->norm() == 0.0) throw Error(ErrorCode::ConfigParse, tag + "zero axis");
      Vec3 axis = *entry.axis;
      if (std::abs(axis.norm() - 1.0) > 1e-12) axis.normalize();
      g.rotors.push_back(Rotor{*entry.position, axis, *entry.spin});
    }
    if (!arm_length_given) g.arm_length.reset();
  } else if (arm_length_given) {
    const double tpt = g.torque_per_thrust;
    g = default_hex_config(*g.arm_length, tpt);
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigParse, "cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void validate(const RunConfig& config) {
  config.vehicle.validate();
  build_allocation(config.vehicle.geometry);
  config.gains.validate();
  config.sim.validate();
}

std::string format_config(const RunConfig& c) {
  std::ostringstream out;
  const VehicleParams& v = c.vehicle;
  const Mat3& j = v.inertia;
  out << "vehicle.mass = " << fmt(v.mass) << '\n'
      << "vehicle.gravity = " << fmt(v.gravity) << '\n'
      << "vehicle.inertia = ";
  for (int k = 0; k < 9; ++k) out << fmt(j(k / 3, k % 3)) << (k < 8 ? ", " : "\n");
  out << "vehicle.alpha = " << fmt(v.alpha) << '\n'
      << "vehicle.alpha_m = " << fmt(v.alpha_m) << '\n'
      << "vehicle.mu = " << fmt(v.mu) << '\n'
      << "vehicle.f_max = " << fmt(v.f_max) << '\n'
      << "vehicle.torque_per_thrust = " << fmt(v.geometry.torque_per_thrust) << '\n';
  if (v.geometry.arm_length) out << "geometry.arm_length = " << fmt(*v.geometry.arm_length) << '\n';
  out << "geometry.directionality = "
      << (v.geometry.directionality == Directionality::Bidirectional ? "bidirectional" : "unidirectional")
      << '\n';
  for (std::size_t i = 0; i < v.geometry.rotors.size(); ++i) {
    const Rotor& r = v.geometry.rotors[i];
    out << "rotor." << i << ".position = " << fmt(r.position) << '\n'
        << "rotor." << i << ".axis = " << fmt(r.axis) << '\n'
        << "rotor." << i << ".spin = " << r.spin << '\n';
  }
  out << "gains.kp = " << fmt(c.gains.kp) << '\n'
      << "gains.kv = " << fmt(c.gains.kv) << '\n'
      << "gains.k_r = " << fmt(c.gains.k_r) << '\n'
      << "gains.k_omega = " << fmt(c.gains.k_omega) << '\n';
  const SimConfig& s = c.sim;
  if (s.c1) out << "certificate.c1 = " << fmt(*s.c1) << '\n';
  if (s.c2) out << "certificate.c2 = " << fmt(*s.c2) << '\n';
  if (s.psi_bar) out << "certificate.psi_bar = " << fmt(*s.psi_bar) << '\n';
  out << "sim.dt = " << fmt(s.dt) << '\n'
      << "sim.duration = " << fmt(s.duration) << '\n'
      << "sim.plant = " << to_string(s.plant_model) << '\n'
      << "sim.mode = " << to_string(s.controller_mode) << '\n'
      << "sim.seed = " << s.seed << '\n'
      << "sim.control_decimation = " << s.control_decimation << '\n'
      << "sim.force = " << (s.force ? "true" : "false") << '\n'
      << "sim.divergence_limit = " << fmt(s.divergence_limit) << '\n';
  const TrajectorySpec& t = s.trajectory;
  out << "trajectory.type = " << to_string(t.kind) << '\n'
      << "trajectory.radius = " << fmt(t.radius) << '\n'
      << "trajectory.height = " << fmt(t.height) << '\n'
      << "trajectory.position_rate = " << fmt(t.position_rate) << '\n'
      << "trajectory.attitude_rate = " << fmt(t.attitude_rate) << '\n'
      << "trajectory.amplitude = " << fmt(t.amplitude) << '\n'
      << "trajectory.frequency = " << fmt(t.frequency) << '\n'
      << "trajectory.hover_position = " << fmt(t.hover_position) << '\n'
      << "trajectory.attitude_axis = " << fmt(t.attitude_axis) << '\n'
      << "trajectory.attitude_angle = " << fmt(t.attitude_angle) << '\n';
  const InitialCondition& ic = s.initial;
  out << "init.position = " << fmt(ic.position) << '\n'
      << "init.velocity = " << fmt(ic.velocity) << '\n'
      << "init.attitude = ";
  for (int k = 0; k < 9; ++k) out << fmt(ic.attitude(k / 3, k % 3)) << (k < 8 ? ", " : "\n");
  out << "init.omega = " << fmt(ic.omega) << '\n'
      << "init.warm_start = " << (ic.warm_start ? "true" : "false") << '\n'
      << "init.position_sigma = " << fmt(ic.position_sigma) << '\n'
      << "init.velocity_sigma = " << fmt(ic.velocity_sigma) << '\n'
      << "init.attitude_sigma = " << fmt(ic.attitude_sigma) << '\n'
      << "init.omega_sigma = " << fmt(ic.omega_sigma) << '\n'
      << "init.thrust_sigma = " << fmt(ic.thrust_sigma) << '\n'
      << "output.path = " << c.output_path << '\n';
  return out.str();
}

}  // namespace omnirotor
