#pragma once

// Command implementations behind the `omnirotor` executable. Each returns
// a process exit code and writes human-readable output to `out`/`err`.

#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>

#include "omnirotor/config.hpp"

namespace omnirotor::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitDivergence = 4;

struct Options {
  std::optional<std::string> config_path;
  std::optional<std::string> out_path;
  std::optional<ControllerMode> mode;
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  bool force = false;
  // step-response / force-track
  double alpha_f = 0.07;
  double alpha_m = 0.1;
  double amplitude = 16.0;
  double frequency = 4.0 * std::numbers::pi / 3.0;
};

/// Config file (or defaults when no path) with command-line overrides applied.
RunConfig effective_config(const Options& options);

int cmd_simulate(const Options& options, std::ostream& out, std::ostream& err);
int cmd_check_gains(const Options& options, std::ostream& out, std::ostream& err);
int cmd_step_response(const Options& options, std::ostream& out, std::ostream& err);
int cmd_force_track(const Options& options, std::ostream& out, std::ostream& err);
int cmd_compare(const Options& options, std::ostream& out, std::ostream& err);

}  // namespace omnirotor::cli
