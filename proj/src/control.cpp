#include "chatter/control.hpp"

#include <algorithm>
#include <cmath>

namespace chatter {

namespace {

double hist_slack(double t) {
  return 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
}

}  // namespace

History::History(State initial, double lookback)
    : initial_(std::move(initial)), lookback_(lookback) {
  if (!(lookback >= 0.0)) throw std::invalid_argument("history lookback must be nonnegative");
}

void History::append(const DenseSegment& segment) {
  if (!segments_.empty() &&
      segment.t_start() < segments_.back().t_end() - hist_slack(segment.t_start()))
    throw std::invalid_argument("history segments must be appended in time order");
  segments_.push_back(segment);
}

double History::covered_until() const {
  return segments_.empty() ? initial_.t : segments_.back().t_end();
}

State History::eval(double t) const {
  if (t < initial_.t - lookback_ - hist_slack(t))
    throw HistoryGap("history queried before the covered lookback window");
  if (t <= initial_.t) {
    State s = initial_;
    s.t = t;
    return s;
  }
  if (segments_.empty() || t > covered_until() + hist_slack(t))
    throw HistoryGap("history queried beyond the committed trajectory");
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double value, const DenseSegment& seg) {
                               return value < seg.t_start();
                             });
  if (it != segments_.begin()) --it;
  return it->eval(std::clamp(t, it->t_start(), it->t_end()));
}

double History::position(double t) const { return eval(t).y[0]; }

VectorField controlled_field(const VectorField& base, const DelayFeedback& fb) {
  VectorField out;
  out.uses_time = true;
  const VectorField inner = base;
  const double gain = fb.gain;
  const double tau = fb.tau;
  const History* hist = fb.history;
  out.accel = [inner, gain, tau, hist](double x, double v, double t) {
    return inner(x, v, t) + gain * (hist->position(t - tau) - x);
  };
  return out;
}

Trajectory simulate_controlled(const HybridSystem& base, double gain, double tau,
                               const State& init, double t_end, const StepControl& ctrl,
                               const ZenoOptions& zopts, History* keep_history) {
  if (gain == 0.0) return simulate(base, init, t_end, ctrl, zopts);
  if (!(tau > 0.0)) throw std::invalid_argument("delay control requires tau > 0");

  History hist(init, tau);
  DelayFeedback fb(gain, tau, &hist);
  HybridSystem controlled = base;
  controlled.field = controlled_field(base.field, fb);

  StepControl local = ctrl;
  local.dt_max = std::min(local.dt_max, tau / 4.0);

  Trajectory traj = simulate(controlled, init, t_end, local, zopts,
                             [&hist](const DenseSegment& seg) { hist.append(seg); });
  if (keep_history) *keep_history = std::move(hist);
  return traj;
}

ControlOutcome classify_outcome(const Trajectory& traj, double t_skip, double period_tol) {
  ControlOutcome out;
  out.transient_skipped = t_skip;
  const double t_from = traj.t_begin + t_skip;

  // Peaks of x1: downward zero crossings of the velocity on flight spans.
  constexpr int kScan = 16;
  for (const auto& seg : traj.segments) {
    if (seg.stuck() || seg.t_end() <= t_from) continue;
    const auto vel = [&seg](double t) {
      return seg.relative_velocity(t) + seg.frame().velocity(t);
    };
    double t_prev = seg.t_start();
    double v_prev = vel(t_prev);
    for (int j = 1; j <= kScan; ++j) {
      const double tj = (j == kScan) ? seg.t_end()
                                     : seg.t_start() + (seg.t_end() - seg.t_start()) * j / kScan;
      const double vj = vel(tj);
      if (v_prev > 0.0 && vj <= 0.0) {
        const double root = refine_bracketed_root(vel, t_prev, tj, v_prev, vj);
        if (root >= t_from) {
          out.peak_times.push_back(root);
          out.peak_values.push_back(seg.eval(root).y[0]);
        }
      }
      t_prev = tj;
      v_prev = vj;
    }
  }

  // Periodicity of the peak sequence.
  const std::size_t n_peaks = out.peak_times.size();
  if (n_peaks >= 6) {
    const std::size_t use_gaps = std::min<std::size_t>(10, n_peaks - 1);
    std::vector<double> gaps;
    for (std::size_t k = n_peaks - use_gaps - 1; k + 1 < n_peaks; ++k)
      gaps.push_back(out.peak_times[k + 1] - out.peak_times[k]);
    const auto [mn, mx] = std::minmax_element(gaps.begin(), gaps.end());
    if (gaps.size() >= 5 && *mx - *mn <= period_tol) {
      out.kind = OutcomeKind::periodic;
      double sum = 0.0;
      for (double g : gaps) sum += g;
      out.period = sum / gaps.size();

      // Amplitude from the peaks actually used plus the troughs between them.
      const std::size_t first_used = n_peaks - use_gaps - 1;
      double peak_sum = 0.0;
      for (std::size_t k = first_used; k < n_peaks; ++k) peak_sum += out.peak_values[k];
      const double mean_peak = peak_sum / (use_gaps + 1);

      double trough_sum = 0.0;
      std::size_t trough_count = 0;
      for (std::size_t k = first_used; k + 1 < n_peaks; ++k) {
        const double ta = out.peak_times[k], tb = out.peak_times[k + 1];
        double lo = std::numeric_limits<double>::infinity();
        for (int j = 0; j <= 128; ++j) {
          const double t = ta + (tb - ta) * j / 128;
          lo = std::min(lo, traj.eval(t).y[0]);
        }
        for (const auto& ev : traj.impacts)
          if (ev.theta > ta && ev.theta < tb) lo = std::min(lo, ev.x);
        trough_sum += lo;
        ++trough_count;
      }
      const double mean_trough = trough_sum / trough_count;
      out.amplitude_peak = mean_peak;
      out.amplitude_half_pp = 0.5 * (mean_peak - mean_trough);
      return out;
    }
  }

  // Chattering signature: an accumulating impact sequence or a run cut by
  // the accumulation detector. A body that merely starts at rest on the
  // surface has no impacts and stays unresolved.
  if (traj.termination == Termination::zeno_detected && !traj.impacts.empty()) {
    out.kind = OutcomeKind::chattering;
    return out;
  }
  if (traj.impacts.size() >= 3) {
    const ZenoReport rep = detect_zeno(traj.impacts);
    if (rep.verdict == ZenoVerdict::chattering) {
      out.kind = OutcomeKind::chattering;
      return out;
    }
  }
  out.kind = OutcomeKind::unresolved;
  return out;
}

}  // namespace chatter
