#pragma once

// Flat `section.key = value` run configuration.
//
//   # comment
//   vehicle.mass = 1.0
//   vehicle.inertia = 0.03, 0.03, 0.03        # diagonal, or 9 row-major values
//   rotor.0.position = 0.12, 0.0, 0.087       # inline geometry replaces the default
//   rotor.0.axis = 0, 0, 1
//   rotor.0.spin = 1
//
// Unknown or repeated keys are rejected. Defaults reproduce the shipped
// six-rotor vehicle with kp = 3, kv = 1, kR = 1, kw = 1.

#include <filesystem>
#include <string>
#include <string_view>

#include "omnirotor/controller.hpp"
#include "omnirotor/plant.hpp"
#include "omnirotor/sim.hpp"

namespace omnirotor {

struct RunConfig {
  VehicleParams vehicle;
  Gains gains;
  SimConfig sim;
  std::string output_path = "trace.csv";
  /// True when the geometry came from rotor.<i>.* keys.
  bool inline_geometry = false;
};

std::string_view to_string(RotorModel model);
std::string_view to_string(ControllerMode mode);
RotorModel parse_rotor_model(std::string_view text);
ControllerMode parse_controller_mode(std::string_view text);

/// Throws ConfigParse with the offending line number on any error.
RunConfig parse_config(std::string_view text);
/// Throws ConfigParse if the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);

/// Runs every module-level check (vehicle, geometry rank, gains, sim).
void validate(const RunConfig& config);

/// Every effective key, one per line, in a form parse_config accepts.
std::string format_config(const RunConfig& config);

}  // namespace omnirotor
