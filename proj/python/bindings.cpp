#include <numbers>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "omnirotor/config.hpp"
#include "omnirotor/sim.hpp"

namespace py = pybind11;
using namespace omnirotor;

namespace {

// Python callers hand over plain 3x3 arrays; accept small drift and project.
RotationMatrix to_rotation(const Mat3& m) {
  if (is_rotation(m)) return RotationMatrix::from_matrix(m);
  RotationMatrix::from_matrix(m, 1e-6);
  return renormalize(m);
}

py::array_t<double> column(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict trace_to_dict(const TraceLog& trace) {
  const std::size_t n = trace.rows.size();
  const std::size_t m = trace.rotor_count;
  auto mat = [n](std::size_t cols) { return py::array_t<double>({n, cols}); };
  py::array_t<double> t(static_cast<py::ssize_t>(n));
  auto p = mat(3), v = mat(3), omega = mat(3), rotors = mat(m);
  auto e_p = mat(3), e_v = mat(3), e_r = mat(3), e_w = mat(3), e_f = mat(3), e_m = mat(3);
  auto force = mat(3), moment = mat(3), force_d = mat(3), moment_d = mat(3);
  py::array_t<double> r({n, std::size_t{3}, std::size_t{3}});
  py::array_t<double> v1(static_cast<py::ssize_t>(n)), v2(static_cast<py::ssize_t>(n)),
      vv(static_cast<py::ssize_t>(n)), ps(static_cast<py::ssize_t>(n));

  auto tt = t.mutable_unchecked<1>();
  auto rr = r.mutable_unchecked<3>();
  auto a1 = v1.mutable_unchecked<1>(), a2 = v2.mutable_unchecked<1>(),
       a3 = vv.mutable_unchecked<1>(), a4 = ps.mutable_unchecked<1>();
  auto put3 = [](py::array_t<double>& a, std::size_t k, const Vec3& x) {
    auto u = a.mutable_unchecked<2>();
    for (int i = 0; i < 3; ++i) u(k, i) = x(i);
  };
  for (std::size_t k = 0; k < n; ++k) {
    const TraceRow& row = trace.rows[k];
    tt(k) = row.t;
    put3(p, k, row.state.p);
    put3(v, k, row.state.v);
    put3(omega, k, row.state.omega);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) rr(k, i, j) = row.state.r(i, j);
    auto ru = rotors.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m; ++i) ru(k, i) = row.rotors(static_cast<Eigen::Index>(i));
    put3(e_p, k, row.e_p);
    put3(e_v, k, row.e_v);
    put3(e_r, k, row.e_r);
    put3(e_w, k, row.e_omega);
    put3(e_f, k, row.e_f);
    put3(e_m, k, row.e_m);
    put3(force, k, row.force);
    put3(moment, k, row.moment);
    put3(force_d, k, row.force_d);
    put3(moment_d, k, row.moment_d);
    a1(k) = row.v1;
    a2(k) = row.v2;
    a3(k) = row.v;
    a4(k) = row.psi;
  }
  py::dict d;
  d["t"] = t;
  d["p"] = p;
  d["v"] = v;
  d["R"] = r;
  d["omega"] = omega;
  d["rotors"] = rotors;
  d["e_p"] = e_p;
  d["e_v"] = e_v;
  d["e_R"] = e_r;
  d["e_omega"] = e_w;
  d["e_F"] = e_f;
  d["e_M"] = e_m;
  d["F"] = force;
  d["M"] = moment;
  d["F_d"] = force_d;
  d["M_d"] = moment_d;
  d["V1"] = v1;
  d["V2"] = v2;
  d["V"] = vv;
  d["psi"] = ps;
  return d;
}

py::dict metrics_to_dict(const Metrics& m) {
  py::dict d;
  for (std::size_t c = 0; c < kErrorChannels.size(); ++c) {
    const ErrorStats& s = m.errors[c];
    py::dict e;
    e["rms"] = s.rms;
    e["max"] = s.max;
    e["rms_tail"] = s.rms_tail;
    e["max_tail"] = s.max_tail;
    e["settle_time"] = s.settle_time;
    d[py::str(std::string(to_string(kErrorChannels[c])))] = e;
  }
  d["max_abs_thrust"] = m.max_abs_thrust;
  d["exceeded_f_max"] = m.exceeded_f_max;
  if (m.decay) {
    py::dict r;
    r["beta"] = m.decay->beta;
    r["envelope_ok"] = m.decay->envelope_ok;
    r["monotone_ok"] = m.decay->monotone_ok;
    r["worst_envelope_ratio"] = m.decay->worst_envelope_ratio;
    r["passed"] = m.decay->passed();
    d["decay"] = r;
  } else {
    d["decay"] = py::none();
  }
  return d;
}

py::dict result_to_dict(const ScenarioResult& r) {
  py::dict d;
  d["trace"] = trace_to_dict(r.trace);
  d["metrics"] = metrics_to_dict(r.metrics);
  d["psi_bar"] = r.psi_bar;
  d["c1"] = r.gain_report.c1;
  d["c2"] = r.gain_report.c2;
  d["warnings"] = r.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Geometric tracking control of an omnidirectional multirotor with rotor dynamics";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  // geometry
  m.def("wedge", &wedge, py::arg("v"));
  m.def("vee", [](const Mat3& x) { return vee(x); }, py::arg("m"));
  m.def("exp_so3", [](const Vec3& w, double dt) { return exp_so3(w, dt).matrix(); },
        py::arg("omega"), py::arg("dt"));
  m.def("psi", [](const Mat3& r, const Mat3& rd) { return psi(to_rotation(r), to_rotation(rd)); },
        py::arg("R"), py::arg("R_d"));
  m.def("attitude_error",
        [](const Mat3& r, const Mat3& rd) { return attitude_error(to_rotation(r), to_rotation(rd)); },
        py::arg("R"), py::arg("R_d"));
  m.def("angular_velocity_error",
        [](const Vec3& w, const Mat3& r, const Mat3& rd, const Vec3& wd) {
          return angular_velocity_error(w, to_rotation(r), to_rotation(rd), wd);
        },
        py::arg("omega"), py::arg("R"), py::arg("R_d"), py::arg("omega_d"));

  // allocation
  py::class_<RotorGeometry>(m, "RotorGeometry")
      .def_property_readonly("positions",
                             [](const RotorGeometry& g) {
                               std::vector<Vec3> out;
                               for (const Rotor& r : g.rotors) out.push_back(r.position);
                               return out;
                             })
      .def_property_readonly("axes",
                             [](const RotorGeometry& g) {
                               std::vector<Vec3> out;
                               for (const Rotor& r : g.rotors) out.push_back(r.axis);
                               return out;
                             })
      .def_property_readonly("spins",
                             [](const RotorGeometry& g) {
                               std::vector<int> out;
                               for (const Rotor& r : g.rotors) out.push_back(r.spin);
                               return out;
                             })
      .def_readwrite("torque_per_thrust", &RotorGeometry::torque_per_thrust)
      .def("__len__", &RotorGeometry::size);
  m.def("default_hex_config", &default_hex_config, py::arg("arm_length") = 0.15,
        py::arg("torque_per_thrust") = 0.15);

  py::class_<AllocationMatrix>(m, "AllocationMatrix")
      .def_property_readonly("matrix", &AllocationMatrix::matrix)
      .def_property_readonly("rank", &AllocationMatrix::rank)
      .def_property_readonly("condition_number", &AllocationMatrix::condition_number)
      .def("apply", &AllocationMatrix::apply, py::arg("thrusts"));
  m.def("build_allocation", &build_allocation, py::arg("geometry"),
        py::arg("max_condition") = kDefaultMaxCondition);
  m.def("allocate", &allocate, py::arg("wrench"), py::arg("allocation"));

  // plant
  py::enum_<RotorModel>(m, "RotorModel")
      .value("TD", RotorModel::ThrustDynamics)
      .value("DCMD", RotorModel::MotorDynamics);
  m.def("aero_thrust", &aero_thrust, py::arg("omega_rotor"), py::arg("mu"));
  m.def("thrust_to_speed", &thrust_to_speed, py::arg("thrust"), py::arg("mu"));
  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("mass", &VehicleParams::mass)
      .def_readwrite("gravity", &VehicleParams::gravity)
      .def_readwrite("inertia", &VehicleParams::inertia)
      .def_readwrite("alpha", &VehicleParams::alpha)
      .def_readwrite("alpha_m", &VehicleParams::alpha_m)
      .def_readwrite("mu", &VehicleParams::mu)
      .def_readwrite("f_max", &VehicleParams::f_max)
      .def_readwrite("geometry", &VehicleParams::geometry);

  // controller / stability
  py::enum_<ControllerMode>(m, "ControllerMode")
      .value("PROPOSED", ControllerMode::Proposed)
      .value("CONVENTIONAL", ControllerMode::Conventional);
  py::class_<Gains>(m, "Gains")
      .def(py::init([](double kp, double kv, double kr, double kw) { return Gains{kp, kv, kr, kw}; }),
           py::arg("kp") = 3.0, py::arg("kv") = 1.0, py::arg("k_r") = 1.0, py::arg("k_omega") = 1.0)
      .def_readwrite("kp", &Gains::kp)
      .def_readwrite("kv", &Gains::kv)
      .def_readwrite("k_r", &Gains::k_r)
      .def_readwrite("k_omega", &Gains::k_omega);
  m.def(
      "validate_gains",
      [](const Gains& g, double c1, double c2, double mass, const Mat3& inertia) {
        const GainReport r = validate_gains(g, c1, c2, mass, inertia);
        py::dict d;
        d["kp_bound"] = r.kp_bound;
        d["kv_bound"] = r.kv_bound;
        d["k_r_bound"] = r.k_r_bound;
        d["k_omega_bound"] = r.k_omega_bound;
        d["translational_ok"] = r.translational_ok();
        d["rotational_ok"] = r.rotational_ok();
        d["valid"] = r.valid();
        return d;
      },
      py::arg("gains"), py::arg("c1"), py::arg("c2"), py::arg("mass"), py::arg("inertia"));
  m.def(
      "find_feasible_constants",
      [](const Gains& g, double mass, const Mat3& inertia, double alpha,
         double psi_bar) -> py::object {
        auto found = find_feasible_constants(g, mass, inertia, alpha, psi_bar);
        if (!found) return py::none();
        return py::make_tuple(found->c1, found->c2);
      },
      py::arg("gains"), py::arg("mass"), py::arg("inertia"), py::arg("alpha"),
      py::arg("psi_bar") = 1.9);

  auto cert_dict = [](bool valid, double rate, const Mat3& lo, const Mat3& hi, const Mat3& w) {
    py::dict d;
    d["valid"] = valid;
    d["decay_rate"] = rate;
    d["lower"] = lo;
    d["upper"] = hi;
    d["W"] = w;
    return d;
  };
  m.def(
      "build_translational_certificate",
      [cert_dict](double kp, double kv, double c1, double mass, double alpha) {
        const auto c = build_translational_certificate(kp, kv, c1, mass, alpha);
        return cert_dict(c.valid, c.decay_rate, c.m11, c.m12, c.w1);
      },
      py::arg("kp"), py::arg("kv"), py::arg("c1"), py::arg("mass"), py::arg("alpha"));
  m.def(
      "build_rotational_certificate",
      [cert_dict](double kr, double kw, double c2, const Mat3& j, double alpha, double psi_bar) {
        const auto c = build_rotational_certificate(kr, kw, c2, j, alpha, psi_bar);
        return cert_dict(c.valid, c.decay_rate, c.m21, c.m22, c.w2);
      },
      py::arg("k_r"), py::arg("k_omega"), py::arg("c2"), py::arg("inertia"), py::arg("alpha"),
      py::arg("psi_bar"));

  // sim
  py::enum_<TrajectoryKind>(m, "TrajectoryKind")
      .value("CIRCLE_TUMBLE", TrajectoryKind::CircleTumble)
      .value("FORCE_SINE", TrajectoryKind::ForceSine)
      .value("HOVER", TrajectoryKind::Hover)
      .value("STEP_ATTITUDE", TrajectoryKind::StepAttitude);
  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("duration", &SimConfig::duration)
      .def_readwrite("plant_model", &SimConfig::plant_model)
      .def_readwrite("controller_mode", &SimConfig::controller_mode)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("control_decimation", &SimConfig::control_decimation)
      .def_readwrite("force", &SimConfig::force)
      .def_property(
          "trajectory", [](const SimConfig& c) { return c.trajectory.kind; },
          [](SimConfig& c, TrajectoryKind k) { c.trajectory.kind = k; });
  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("vehicle", &RunConfig::vehicle)
      .def_readwrite("gains", &RunConfig::gains)
      .def_readwrite("sim", &RunConfig::sim)
      .def_readwrite("output_path", &RunConfig::output_path)
      .def("__str__", &format_config);
  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", [](const std::string& path) { return load_config(path); }, py::arg("path"));

  m.def(
      "run_scenario",
      [](const SimConfig& c, const VehicleParams& p, const Gains& g) {
        ScenarioResult r;
        {
          py::gil_scoped_release release;
          r = run_scenario(c, p, g);
        }
        return result_to_dict(r);
      },
      py::arg("config"), py::arg("params") = VehicleParams{}, py::arg("gains") = Gains{});
  m.def(
      "compare_controllers",
      [](const SimConfig& c, const VehicleParams& p, const Gains& g) {
        ComparisonReport r;
        {
          py::gil_scoped_release release;
          r = compare_controllers(c, p, g);
        }
        py::dict d;
        d["proposed"] = result_to_dict(r.proposed);
        d["conventional"] = result_to_dict(r.conventional);
        py::dict ratio;
        for (std::size_t k = 0; k < kErrorChannels.size(); ++k) {
          ratio[py::str(std::string(to_string(kErrorChannels[k])))] = r.rms_ratio[k];
        }
        d["rms_ratio"] = ratio;
        return d;
      },
      py::arg("config"), py::arg("params") = VehicleParams{}, py::arg("gains") = Gains{});
  m.def(
      "step_response_experiment",
      [](double af, double am, double dt, double duration) {
        const StepResponseTrace s = step_response_experiment(af, am, dt, duration);
        py::dict d;
        d["t"] = column(s.t);
        d["td"] = column(s.td);
        d["dcmd"] = column(s.dcmd);
        d["dcmd_speed"] = column(s.dcmd_speed);
        return d;
      },
      py::arg("alpha_f") = 0.07, py::arg("alpha_m") = 0.1, py::arg("dt") = 1e-4,
      py::arg("duration") = 1.0);
  m.def(
      "force_track_experiment",
      [](ControllerMode mode, double alpha, double amplitude, double frequency, double dt,
         double duration) {
        ForceTrackConfig cfg;
        cfg.params.alpha = alpha;
        cfg.mode = mode;
        cfg.amplitude = amplitude;
        cfg.frequency = frequency;
        cfg.dt = dt;
        cfg.duration = duration;
        const ForceTrackTrace tr = force_track_experiment(cfg);
        const ForceTrackStats st = analyze_force_tracking(tr, amplitude, frequency, 5.0 * alpha);
        py::dict d;
        d["t"] = column(tr.t);
        d["fz_d"] = column(tr.fz_d);
        d["fz_cmd"] = column(tr.fz_cmd);
        d["fz"] = column(tr.fz);
        d["max_abs_error"] = st.max_abs_error;
        d["amplitude_ratio"] = st.amplitude_ratio;
        d["phase_lag"] = st.phase_lag;
        return d;
      },
      py::arg("mode") = ControllerMode::Proposed, py::arg("alpha") = 0.07,
      py::arg("amplitude") = 16.0, py::arg("frequency") = 4.0 * std::numbers::pi / 3.0,
      py::arg("dt") = 1e-3, py::arg("duration") = 6.0);
}
