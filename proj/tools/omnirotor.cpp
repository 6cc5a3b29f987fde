// omnirotor: simulate, certify and compare the geometric tracking controller.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "omnirotor/cli.hpp"

namespace cli = omnirotor::cli;

int main(int argc, char** argv) {
  CLI::App app{"Geometric tracking control of an omnidirectional multirotor with rotor dynamics"};
  app.require_subcommand(1);

  cli::Options opts;
  std::string mode;
  std::string config_path;
  std::string out_path;
  double dt = 0.0;
  double duration = 0.0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", config_path, "Run configuration file");
    sub->add_option("--out", out_path, "Output CSV path");
    sub->add_option("--dt", dt, "Integration step [s]")->check(CLI::PositiveNumber);
    sub->add_option("--duration", duration, "Simulated time [s]")->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "Run a closed-loop scenario, write trace CSV and summary");
  add_common(simulate, true);
  simulate->add_option("--mode", mode, "Controller mode")->check(CLI::IsMember({"proposed", "conventional"}));
  simulate->add_option("--seed", seed, "Seed for randomized initial conditions");
  simulate->add_flag("--force", opts.force, "Run even when the gains cannot be certified");

  auto* check = app.add_subcommand("check-gains", "Report gain conditions and Lyapunov certificates");
  check->add_option("--config", config_path, "Run configuration file");

  auto* step = app.add_subcommand("step-response", "Rotor step response of the TD and DCMD models");
  add_common(step, true);
  step->add_option("--alpha-f", opts.alpha_f, "TD thrust time constant [s]")->check(CLI::PositiveNumber);
  step->add_option("--alpha-m", opts.alpha_m, "DCMD speed time constant [s]")->check(CLI::PositiveNumber);

  auto* track = app.add_subcommand("force-track", "Single-axis sinusoidal force tracking on a clamped vehicle");
  add_common(track, true);
  track->add_option("--mode", mode, "Only run this mode")->check(CLI::IsMember({"proposed", "conventional"}));
  track->add_option("--alpha-f", opts.alpha_f, "Thrust time constant [s]")->check(CLI::PositiveNumber);
  track->add_option("--amplitude", opts.amplitude, "Force amplitude [N]")->check(CLI::PositiveNumber);
  track->add_option("--frequency", opts.frequency, "Force frequency [rad/s]")->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "Proposed vs conventional controller on one scenario");
  add_common(compare, true);
  compare->add_option("--seed", seed, "Seed for randomized initial conditions");
  compare->add_flag("--force", opts.force, "Run even when the gains cannot be certified");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  auto* active = app.get_subcommands().front();
  auto given = [&](const char* name) {
    const auto* o = active->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  if (given("--config")) opts.config_path = config_path;
  if (given("--out")) opts.out_path = out_path;
  if (given("--dt")) opts.dt = dt;
  if (given("--duration")) opts.duration = duration;
  if (given("--seed")) opts.seed = seed;
  if (given("--mode")) opts.mode = omnirotor::parse_controller_mode(mode);

  if (active == simulate) return cli::cmd_simulate(opts, std::cout, std::cerr);
  if (active == check) return cli::cmd_check_gains(opts, std::cout, std::cerr);
  if (active == step) return cli::cmd_step_response(opts, std::cout, std::cerr);
  if (active == track) return cli::cmd_force_track(opts, std::cout, std::cerr);
  return cli::cmd_compare(opts, std::cout, std::cerr);
}
