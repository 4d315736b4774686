// Trace and report emitters: CSV trajectory traces (uniform samples plus
// every event time, full double precision) and versioned JSON reports.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "chatter/control.hpp"
#include "chatter/engine.hpp"
#include "chatter/theorem.hpp"

namespace chatter {

enum class TraceFlag { flight, impact, apex, stick, release };

struct TraceRecord {
  double t = 0.0;
  std::vector<double> y;
  int segment = 0;
  TraceFlag flag = TraceFlag::flight;
};

std::string to_string(TraceFlag flag);
std::string to_string(Termination term);
std::string to_string(ZenoVerdict verdict);
std::string to_string(OutcomeKind kind);

/// Full-precision shortest round-trip formatting used by every emitter.
std::string format_double(double v);

/// Uniform sampling at dt_out (default t_end/2000 when 0) plus all impact
/// times (pre- and post-velocity records sharing t), apexes and releases.
std::vector<TraceRecord> build_trace(const Trajectory& traj, double dt_out = 0.0);

/// Header line plus one row per record: t, y..., segment, flag.
std::string trace_to_csv(const std::vector<TraceRecord>& records, int dimension);

nlohmann::json simulation_report(const Trajectory& traj, const ZenoOptions& zopts = {});
nlohmann::json certificate_report(const ChatteringCertificate& cert);
nlohmann::json control_report(const ControlOutcome& outcome);

}  // namespace chatter
