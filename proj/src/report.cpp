#include "chatter/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace chatter {

std::string to_string(TraceFlag flag) {
  switch (flag) {
    case TraceFlag::flight: return "flight";
    case TraceFlag::impact: return "impact";
    case TraceFlag::apex: return "apex";
    case TraceFlag::stick: return "stick";
    case TraceFlag::release: return "release";
  }
  return "?";
}

std::string to_string(Termination term) {
  switch (term) {
    case Termination::reached_t_end: return "reached_t_end";
    case Termination::zeno_detected: return "zeno_detected";
    case Termination::impact_cap: return "impact_cap";
    case Termination::error: return "error";
  }
  return "?";
}

std::string to_string(ZenoVerdict verdict) {
  switch (verdict) {
    case ZenoVerdict::chattering: return "chattering";
    case ZenoVerdict::no_accumulation: return "no_accumulation";
    case ZenoVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::periodic: return "periodic";
    case OutcomeKind::chattering: return "chattering";
    case OutcomeKind::unresolved: return "unresolved";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

int segment_index_at(const Trajectory& traj, double t, bool prefer_earlier) {
  auto it = std::upper_bound(traj.segments.begin(), traj.segments.end(), t,
                             [](double value, const DenseSegment& seg) {
                               return value < seg.t_start();
                             });
  if (it != traj.segments.begin()) --it;
  int idx = static_cast<int>(it - traj.segments.begin());
  if (prefer_earlier && idx > 0 && traj.segments[idx].t_start() == t) --idx;
  return idx;
}

TraceRecord record_at(const Trajectory& traj, double t, TraceFlag fallback_flag) {
  TraceRecord rec;
  rec.t = t;
  rec.segment = segment_index_at(traj, t, false);
  const DenseSegment& seg = traj.segments[rec.segment];
  rec.y = seg.eval(std::clamp(t, seg.t_start(), seg.t_end())).y;
  rec.flag = seg.stuck() ? TraceFlag::stick : fallback_flag;
  return rec;
}

}  // namespace

std::vector<TraceRecord> build_trace(const Trajectory& traj, double dt_out) {
  std::vector<TraceRecord> out;
  if (traj.segments.empty()) return out;

  const double t0 = traj.segments.front().t_start();
  const double t1 = traj.segments.back().t_end();
  if (dt_out <= 0.0) dt_out = (t1 - t0) / 2000.0;
  if (!(dt_out > 0.0)) return out;

  for (double t = t0; t < t1; t += dt_out) out.push_back(record_at(traj, t, TraceFlag::flight));
  out.push_back(record_at(traj, t1, TraceFlag::flight));

  for (const auto& ev : traj.impacts) {
    // Pre-impact record from the segment ending at theta, post-impact from
    // the one starting there; both share the impact time.
    TraceRecord pre;
    pre.t = ev.theta;
    pre.segment = segment_index_at(traj, ev.theta, true);
    pre.y = traj.segments[pre.segment].eval(ev.theta).y;
    pre.y[0] = ev.x;
    pre.y[1] = ev.v_pre;
    pre.flag = TraceFlag::impact;
    out.push_back(pre);

    TraceRecord post = pre;
    post.segment = segment_index_at(traj, ev.theta, false);
    post.y[1] = ev.v_post;
    post.flag = TraceFlag::impact;
    out.push_back(post);
  }

  for (double t : apex_times(traj)) out.push_back(record_at(traj, t, TraceFlag::apex));
  for (double t : traj.releases) out.push_back(record_at(traj, t, TraceFlag::release));

  std::stable_sort(out.begin(), out.end(),
                   [](const TraceRecord& a, const TraceRecord& b) {
                     if (a.t != b.t) return a.t < b.t;
                     return false;  // keep pre/post impact order at shared times
                   });
  return out;
}

std::string trace_to_csv(const std::vector<TraceRecord>& records, int dimension) {
  std::string csv = "t,x1,x2";
  if (dimension == 4) csv += ",x3,x4";
  csv += ",segment,flag\n";
  for (const auto& rec : records) {
    csv += format_double(rec.t);
    for (int i = 0; i < dimension; ++i) {
      csv += ',';
      csv += format_double(i < static_cast<int>(rec.y.size()) ? rec.y[i] : 0.0);
    }
    csv += ',';
    csv += std::to_string(rec.segment);
    csv += ',';
    csv += to_string(rec.flag);
    csv += '\n';
  }
  return csv;
}

nlohmann::json simulation_report(const Trajectory& traj, const ZenoOptions& zopts) {
  nlohmann::json j;
  j["schema"] = 1;
  j["termination"] = to_string(traj.termination);
  j["t_begin"] = traj.t_begin;
  j["t_final"] = traj.t_final;
  j["n_impacts"] = traj.impacts.size();

  nlohmann::json times = nlohmann::json::array();
  for (const auto& ev : traj.impacts) times.push_back(ev.theta);
  j["impact_times"] = std::move(times);

  if (traj.impacts.size() >= 3) {
    const ZenoReport rep = detect_zeno(traj.impacts, zopts);
    j["gaps"] = rep.gaps;
    j["ratios"] = rep.ratios;
    j["verdict"] = to_string(rep.verdict);
    if (std::isfinite(rep.terminal_ratio)) j["terminal_ratio"] = rep.terminal_ratio;
    if (std::isfinite(rep.theta_inf)) j["theta_inf_estimate"] = rep.theta_inf;
  } else {
    j["verdict"] = "inconclusive";
  }

  if (traj.sticking) {
    j["sticking"] = {{"t_stick", traj.sticking->t_stick}, {"mode", traj.sticking->mode}};
  }
  if (!traj.releases.empty()) j["releases"] = traj.releases;
  return j;
}

nlohmann::json certificate_report(const ChatteringCertificate& cert) {
  nlohmann::json j;
  j["schema"] = 1;
  j["note"] = "sampled, non-rigorous";
  j["grid_n"] = cert.bounds.grid_n;
  j["time_slices"] = cert.bounds.times;
  j["time_dependent_field"] = cert.bounds.time_dependent;

  j["c1"] = {{"holds", cert.c1_holds},
             {"max_f", cert.bounds.max_f},
             {"witness", {cert.bounds.max_f_witness.u, cert.bounds.max_f_witness.v}}};
  if (std::isfinite(cert.bounds.m_est)) {
    j["m_est"] = cert.bounds.m_est;
    j["m_witness"] = {cert.bounds.m_witness.u, cert.bounds.m_witness.v};
  }
  j["M_est"] = cert.bounds.M_est;
  j["M_witness"] = {cert.bounds.M_witness.u, cert.bounds.M_witness.v};

  j["c2"] = {{"holds", cert.c2.holds},
             {"max_asymmetry", cert.c2.max_asymmetry},
             {"tol", cert.c2_tol},
             {"witness", {cert.c2.witness.u, cert.c2.witness.v}}};

  j["inequality"] = {{"holds", cert.inequality.holds}};
  if (std::isfinite(cert.inequality.lhs)) {
    j["inequality"]["lhs"] = cert.inequality.lhs;
    j["inequality"]["margin"] = cert.inequality.margin;
  }

  j["overall"] = cert.overall;
  j["initial_set"] = cert.initial_set;
  return j;
}

nlohmann::json control_report(const ControlOutcome& outcome) {
  nlohmann::json j;
  j["schema"] = 1;
  j["classification"] = to_string(outcome.kind);
  j["transient_skipped"] = outcome.transient_skipped;
  if (outcome.kind == OutcomeKind::periodic) {
    j["period"] = outcome.period;
    j["amplitude_half_pp"] = outcome.amplitude_half_pp;
    j["amplitude_peak"] = outcome.amplitude_peak;
  }
  j["peak_times"] = outcome.peak_times;
  j["peak_values"] = outcome.peak_values;
  return j;
}

}  // namespace chatter
