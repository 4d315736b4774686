#include "chatter/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chatter {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double span_slack(double a, double b) {
  return 4.0 * std::numeric_limits<double>::epsilon() * std::max({std::abs(a), std::abs(b), 1.0});
}

// Constraint reaction holding the body on the surface: X''(t) - f at the
// surface state. Sticking is valid while this stays nonnegative.
double surface_reaction(const HybridSystem& sys, double t) {
  const double x = sys.guard.position(t);
  const double v = sys.guard.velocity(t);
  return sys.guard.acceleration(t) - sys.field(x, v, t);
}

// Pinned copy of the system: the impacting pair rides the surface exactly
// (zero gap dynamics), while the spring pair keeps its own dynamics.
HybridSystem pinned_system(const HybridSystem& sys) {
  HybridSystem pinned = sys;
  const Guard g = sys.guard;
  pinned.field.accel = [g](double, double, double t) { return g.acceleration(t); };
  pinned.field.uses_time = !g.is_fixed();
  return pinned;
}

struct StickOutcome {
  std::vector<DenseSegment> segments;
  std::optional<double> release_time;
};

// Advances the surface phase from t0 to t_end in chunks no wider than
// ctrl.dt_max, scanning the reaction for a sign change. Chunked advance
// keeps delay-feedback history queries behind the already-committed spans.
StickOutcome stick_until_release(const HybridSystem& sys, double t0,
                                 const std::vector<double>& tail, double t_end,
                                 const StepControl& ctrl, const SegmentSink& sink) {
  StickOutcome out;
  const auto reaction = [&sys](double t) { return surface_reaction(sys, t); };

  if (reaction(t0) < 0.0) {
    out.release_time = t0;  // constraint cannot hold at all
    return out;
  }

  const HybridSystem pinned = pinned_system(sys);
  std::vector<double> spring = tail;
  double t = t0;
  constexpr int kScan = 16;

  while (t < t_end - span_slack(t, t_end)) {
    const double chunk_end = std::min(t_end, t + ctrl.dt_max);

    // The reaction depends on time only; scan it ahead of the chunk.
    std::optional<double> release;
    double t_prev = t;
    double r_prev = reaction(t);
    for (int j = 1; j <= kScan; ++j) {
      const double tj = (j == kScan) ? chunk_end : t + (chunk_end - t) * j / kScan;
      const double rj = reaction(tj);
      if (r_prev >= 0.0 && rj < 0.0) {
        release = (r_prev == 0.0)
                      ? t_prev
                      : refine_bracketed_root(reaction, t_prev, tj, r_prev, rj);
        break;
      }
      t_prev = tj;
      r_prev = rj;
    }

    const double target = release ? *release : chunk_end;
    if (target > t + span_slack(t, target)) {
      StepControl local = ctrl;
      local.dt_init = target - t;
      auto res = integrate_until_event_rel(pinned, t, 0.0, 0.0, spring, target, local, {});
      for (auto& seg : res.segments) {
        seg.mark_stuck();
        if (sink) sink(seg);
        out.segments.push_back(seg);
      }
      if (!out.segments.empty()) {
        const State end = out.segments.back().end_state();
        spring.assign(end.y.begin() + 2, end.y.end());
        t = out.segments.back().t_end();
      } else {
        t = target;
      }
    } else {
      t = target;
    }

    if (release) {
      out.release_time = t;
      return out;
    }
  }
  return out;
}

struct EngineState {
  double t = 0.0;
  double q = 0.0;                    // gap above the surface
  double w = 0.0;                    // relative velocity
  std::vector<double> spring_tail;  // x3, x4 when present
};

Trajectory simulate_core(const HybridSystem& sys, const State& init, double t_end,
                         const StepControl& ctrl, const ZenoOptions& zopts,
                         std::optional<long> truncation_cap, const SegmentSink& sink) {
  ctrl.validate();
  zopts.validate();
  if (init.dimension() != sys.dimension())
    throw std::invalid_argument("initial state dimension does not match the system");
  if (!(t_end > init.t)) throw std::invalid_argument("t_end must exceed the initial time");

  Trajectory traj;
  traj.t_begin = init.t;
  traj.t_final = init.t;

  EngineState s;
  s.t = init.t;
  s.q = init.y[0] - sys.guard.position(init.t);
  s.w = init.y[1] - sys.guard.velocity(init.t);
  s.spring_tail.assign(init.y.begin() + 2, init.y.end());
  if (s.q < -10.0 * kPositionTol)
    throw std::invalid_argument("initial state penetrates the guard");

  const double r = sys.impact.restitution();
  double prev_gap = 0.0;
  bool have_prev_gap = false;
  double last_theta = 0.0;
  bool have_last_theta = false;

  enum class Mode { flight, stick };
  Mode mode = Mode::flight;
  if (s.q <= kPositionTol && std::abs(s.w) <= kGrazingSpeed) {
    mode = Mode::stick;
    s.q = 0.0;
    s.w = 0.0;
    traj.sticking = StickingInfo{init.t, "initial contact at rest"};
  }

  const auto enter_sticking = [&](double t_stick_estimate, const char* why) {
    if (!traj.sticking) traj.sticking = StickingInfo{t_stick_estimate, why};
    mode = Mode::stick;
    s.q = 0.0;
    s.w = 0.0;
  };

  while (s.t < t_end - span_slack(s.t, t_end)) {
    if (mode == Mode::flight) {
      StepControl local = ctrl;
      if (have_prev_gap) {
        // Gaps contract by roughly the restitution factor; keep steps on
        // the scale of the upcoming arc so its crossing stays resolved.
        local.dt_init = std::max(local.dt_min, prev_gap * r / 8.0);
        local.dt_max = std::min(local.dt_max, std::max(4.0 * prev_gap, 64.0 * local.dt_min));
      }
      auto res = integrate_until_event_rel(sys, s.t, s.q, s.w, s.spring_tail, t_end, local, sink);
      for (auto& seg : res.segments) {
        if (seg.guard_gap(seg.t_start()) < -10.0 * kPositionTol)
          throw PenetrationDetected("flight segment starts below the guard at t=" +
                                    std::to_string(seg.t_start()));
        traj.segments.push_back(std::move(seg));
      }
      if (!traj.segments.empty()) traj.t_final = traj.segments.back().t_end();

      if (!res.event) {
        traj.t_final = t_end;
        break;
      }

      const EventHit& hit = *res.event;
      s.t = hit.t;
      s.q = 0.0;
      s.spring_tail.assign(hit.pre.y.begin() + 2, hit.pre.y.end());
      traj.t_final = hit.t;

      const double w_pre = hit.rel_velocity;
      if (w_pre >= -kGrazingSpeed) {
        enter_sticking(hit.t, "grazing contact");
        continue;
      }

      const double surf_v = sys.guard.velocity(hit.t);
      ImpactEvent ev;
      ev.theta = hit.t;
      ev.x = sys.guard.position(hit.t);
      ev.v_pre = hit.pre.y[1];
      ev.v_post = apply_impact(sys.impact, ev.v_pre, surf_v);
      ev.index = static_cast<int>(traj.impacts.size()) + 1;
      traj.impacts.push_back(ev);

      s.w = -r * w_pre;  // exact relative rebound

      double gap = 0.0;
      bool have_gap = false;
      if (have_last_theta) {
        gap = hit.t - last_theta;
        have_gap = true;
      }
      last_theta = hit.t;
      have_last_theta = true;
      if (have_gap) {
        prev_gap = gap;
        have_prev_gap = true;
      }

      if (static_cast<long>(traj.impacts.size()) >= zopts.impact_cap) {
        traj.termination = Termination::impact_cap;
        return traj;
      }

      if (truncation_cap && static_cast<long>(traj.impacts.size()) >= *truncation_cap) {
        enter_sticking(hit.t, "impact cap reached");
        traj.termination = Termination::zeno_detected;
        continue;
      }

      if ((have_gap && gap < zopts.min_gap) || std::abs(s.w) < zopts.stick_speed) {
        double theta_inf = hit.t;
        if (traj.impacts.size() >= 3) {
          const ZenoReport rep = detect_zeno(traj.impacts, zopts);
          if (std::isfinite(rep.theta_inf) && rep.theta_inf > hit.t) theta_inf = rep.theta_inf;
        }
        enter_sticking(theta_inf, "zeno accumulation");
        traj.termination = Termination::zeno_detected;
        continue;
      }
    } else {
      auto stick = stick_until_release(sys, s.t, s.spring_tail, t_end, ctrl, sink);
      for (auto& seg : stick.segments) traj.segments.push_back(std::move(seg));
      if (!traj.segments.empty()) traj.t_final = traj.segments.back().t_end();

      if (!stick.release_time) {
        traj.t_final = t_end;
        break;
      }
      s.t = *stick.release_time;
      s.q = 0.0;
      s.w = 0.0;
      if (!stick.segments.empty()) {
        const State end = traj.segments.back().end_state();
        s.spring_tail.assign(end.y.begin() + 2, end.y.end());
      }
      traj.releases.push_back(s.t);
      traj.t_final = s.t;
      traj.termination = Termination::reached_t_end;
      mode = Mode::flight;
      have_prev_gap = false;
    }
  }

  if (traj.termination == Termination::reached_t_end) traj.t_final = std::max(traj.t_final, t_end);
  return traj;
}

}  // namespace

State Trajectory::eval(double t) const {
  if (segments.empty()) throw OutOfRange("trajectory has no segments");
  const double slack = span_slack(t_begin, t_final);
  if (t < segments.front().t_start() - slack || t > segments.back().t_end() + slack)
    throw OutOfRange("time outside the trajectory span");
  // Last segment starting at or before t; boundaries resolve to the later
  // segment, so impact times report the post-impact velocity.
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double value, const DenseSegment& seg) {
                               return value < seg.t_start();
                             });
  if (it != segments.begin()) --it;
  return it->eval(std::clamp(t, it->t_start(), it->t_end()));
}

Trajectory simulate(const HybridSystem& system, const State& init, double t_end,
                    const StepControl& ctrl, const ZenoOptions& zopts, const SegmentSink& sink) {
  return simulate_core(system, init, t_end, ctrl, zopts, std::nullopt, sink);
}

Trajectory simulate_truncated(const HybridSystem& system, const State& init, double t_end,
                              const StepControl& ctrl, const ZenoOptions& zopts,
                              const SegmentSink& sink, long cap) {
  if (cap <= 0) {
    // floor(1/r) with a nudge so representation error in 1/r cannot drop a
    // whole impact (1/0.2 evaluates below 5 in binary floating point).
    cap = static_cast<long>(std::floor(1.0 / system.impact.restitution() + 1e-9));
  }
  return simulate_core(system, init, t_end, ctrl, zopts, std::max(cap, 1L), sink);
}

StickingResult sticking_dynamics(const HybridSystem& system, const State& at, double t_end,
                                 const StepControl& ctrl, const SegmentSink& sink) {
  ctrl.validate();
  if (at.dimension() != system.dimension())
    throw std::invalid_argument("state dimension does not match the system");
  std::vector<double> tail(at.y.begin() + 2, at.y.end());
  auto out = stick_until_release(system, at.t, tail, t_end, ctrl, sink);
  return StickingResult{std::move(out.segments), out.release_time};
}

ZenoReport detect_zeno(const std::vector<ImpactEvent>& impacts, const ZenoOptions& zopts) {
  zopts.validate();
  if (impacts.size() < 3) throw TooFewImpacts("zeno analysis requires at least 3 impacts");

  ZenoReport rep;
  rep.impact_times.reserve(impacts.size());
  for (const auto& ev : impacts) rep.impact_times.push_back(ev.theta);
  for (std::size_t i = 0; i + 1 < rep.impact_times.size(); ++i)
    rep.gaps.push_back(rep.impact_times[i + 1] - rep.impact_times[i]);
  for (std::size_t i = 0; i + 1 < rep.gaps.size(); ++i) {
    const double denom = rep.gaps[i];
    rep.ratios.push_back(denom > 0.0 ? rep.gaps[i + 1] / denom : kNaN);
  }

  const std::size_t window = std::min<std::size_t>(zopts.ratio_window, rep.ratios.size());
  bool usable = window > 0;
  double log_sum = 0.0;
  for (std::size_t k = rep.ratios.size() - window; usable && k < rep.ratios.size(); ++k) {
    if (!(rep.ratios[k] > 0.0) || !std::isfinite(rep.ratios[k])) usable = false;
    else log_sum += std::log(rep.ratios[k]);
  }
  if (!usable) {
    rep.verdict = ZenoVerdict::inconclusive;
    return rep;
  }
  rep.terminal_ratio = std::exp(log_sum / static_cast<double>(window));

  bool decreasing = true;
  for (std::size_t k = rep.gaps.size() - std::min(rep.gaps.size(), window + 1);
       k + 1 < rep.gaps.size(); ++k)
    if (!(rep.gaps[k + 1] < rep.gaps[k])) decreasing = false;

  if (rep.terminal_ratio < 1.0 - zopts.ratio_margin && decreasing) {
    rep.verdict = ZenoVerdict::chattering;
    rep.theta_inf = rep.impact_times.back() +
                    rep.gaps.back() * rep.terminal_ratio / (1.0 - rep.terminal_ratio);
  } else if (rep.terminal_ratio >= 1.0 - zopts.ratio_margin) {
    rep.verdict = ZenoVerdict::no_accumulation;
  } else {
    rep.verdict = ZenoVerdict::inconclusive;
  }
  return rep;
}

std::vector<double> apex_times(const Trajectory& traj) {
  std::vector<double> apexes;
  constexpr int kScan = 16;
  bool arc_open = false;  // inside a flight arc whose start was handled

  for (const auto& seg : traj.segments) {
    if (seg.stuck()) {
      arc_open = false;
      continue;
    }
    const auto vel = [&seg](double t) {
      return seg.relative_velocity(t) + seg.frame().velocity(t);
    };
    if (!arc_open) {
      if (std::abs(vel(seg.t_start())) <= kGrazingSpeed) apexes.push_back(seg.t_start());
      arc_open = true;
    }
    double t_prev = seg.t_start();
    double v_prev = vel(t_prev);
    for (int j = 1; j <= kScan; ++j) {
      const double tj = (j == kScan) ? seg.t_end()
                                     : seg.t_start() + (seg.t_end() - seg.t_start()) * j / kScan;
      const double vj = vel(tj);
      if ((v_prev > 0.0 && vj <= 0.0) || (v_prev < 0.0 && vj >= 0.0))
        apexes.push_back(refine_bracketed_root(vel, t_prev, tj, v_prev, vj));
      t_prev = tj;
      v_prev = vj;
    }
  }

  std::sort(apexes.begin(), apexes.end());
  apexes.erase(std::unique(apexes.begin(), apexes.end(),
                           [](double a, double b) { return b - a <= span_slack(a, b); }),
               apexes.end());
  return apexes;
}

TrajectoryDelta compare_trajectories(const Trajectory& a, const Trajectory& b, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("comparison grid needs at least 2 points");
  const double lo = std::max(a.t_begin, b.t_begin);
  const double hi = std::min(a.t_final, b.t_final);
  if (!(lo < hi)) throw DisjointWindows("trajectories do not share a time window");

  TrajectoryDelta delta;
  for (int k = 0; k < grid_n; ++k) {
    const double t = lo + (hi - lo) * k / (grid_n - 1);
    const State sa = a.eval(t);
    const State sb = b.eval(t);
    delta.position = std::max(delta.position, std::abs(sa.y[0] - sb.y[0]));
    delta.velocity = std::max(delta.velocity, std::abs(sa.y[1] - sb.y[1]));
  }
  return delta;
}

double min_guard_gap(const Trajectory& traj, int samples_per_segment) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& seg : traj.segments) {
    for (int j = 1; j <= samples_per_segment; ++j) {
      const double t =
          seg.t_start() + (seg.t_end() - seg.t_start()) * j / (samples_per_segment + 1);
      worst = std::min(worst, seg.guard_gap(t));
    }
  }
  return worst;
}

std::vector<RatioBoundSample> ratio_bound_check(const Trajectory& traj,
                                                const VectorField& field, double restitution,
                                                int samples_per_arc) {
  std::vector<RatioBoundSample> out;
  const auto& imps = traj.impacts;
  for (std::size_t i = 0; i + 2 < imps.size(); ++i) {
    const double t0 = imps[i].theta, t1 = imps[i + 1].theta, t2 = imps[i + 2].theta;
    if (!(t1 > t0) || !(t2 > t1)) continue;
    double fmax = 0.0, fmin = std::numeric_limits<double>::infinity();
    const int n = 2 * samples_per_arc;
    for (int j = 0; j <= n; ++j) {
      const double t = t0 + (t2 - t0) * j / n;
      const State st = traj.eval(t);
      const double f = std::abs(field(st.y[0], st.y[1], t));
      fmax = std::max(fmax, f);
      fmin = std::min(fmin, f);
    }
    RatioBoundSample sample;
    sample.index = imps[i].index;
    sample.ratio = (t2 - t1) / (t1 - t0);
    sample.bound = fmin > 0.0 ? restitution * fmax / fmin
                              : std::numeric_limits<double>::infinity();
    out.push_back(sample);
  }
  return out;
}

}  // namespace chatter
