#pragma once

// CSV serialization. Floats use 17 significant digits so a rerun can be
// diffed bit for bit.

#include <ostream>
#include <string>
#include <vector>

#include "omnirotor/sim.hpp"

namespace omnirotor {

/// Column names with units, in output order.
std::vector<std::string> trace_csv_header(std::size_t rotor_count, RotorModel model);

void write_trace_csv(std::ostream& out, const TraceLog& trace);
void write_step_response_csv(std::ostream& out, const StepResponseTrace& trace);
/// One shared time/desired column, then cmd and actual F_z per run.
/// All runs must share the same time grid.
void write_force_track_csv(std::ostream& out, const std::vector<ForceTrackTrace>& runs);

std::string format_double(double x);

}  // namespace omnirotor
