// Delay feedback C [x1(t - tau) - x1(t)] on the impacting system, with the
// trajectory history it reads from, and period/amplitude classification of
// the controlled motion.
#pragma once

#include <limits>
#include <vector>

#include "chatter/engine.hpp"

namespace chatter {

struct HistoryGap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Append-only record of the trajectory so far. Before the initial time the
/// state is the constant initial state (the conventional pre-history for a
/// delay equation); afterwards it interpolates the committed segments.
/// Positions are continuous across impacts; at a stored impact time the
/// velocity reported is the post-impact one.
class History {
 public:
  History(State initial, double lookback);

  void append(const DenseSegment& segment);

  State eval(double t) const;
  double position(double t) const;

  double initial_time() const { return initial_.t; }
  double covered_until() const;

 private:
  State initial_;
  double lookback_;
  std::vector<DenseSegment> segments_;
};

inline State history_eval(const History& history, double t) { return history.eval(t); }

struct DelayFeedback {
  double gain = 0.0;  // C
  double tau = 0.0;   // delay, > 0
  const History* history = nullptr;

  DelayFeedback(double gain_c, double delay, const History* hist)
      : gain(gain_c), tau(delay), history(hist) {
    if (!(delay > 0.0)) throw std::invalid_argument("delay feedback requires tau > 0");
    if (!hist) throw std::invalid_argument("delay feedback requires a history oracle");
  }
};

/// Field whose acceleration adds gain * (x1(t - tau) - x1) to the base.
VectorField controlled_field(const VectorField& base, const DelayFeedback& fb);

enum class OutcomeKind { periodic, chattering, unresolved };

struct ControlOutcome {
  OutcomeKind kind = OutcomeKind::unresolved;
  double period = std::numeric_limits<double>::quiet_NaN();
  double amplitude_half_pp = std::numeric_limits<double>::quiet_NaN();  // half peak-to-trough
  double amplitude_peak = std::numeric_limits<double>::quiet_NaN();    // mean peak value
  double transient_skipped = 0.0;
  std::vector<double> peak_times;
  std::vector<double> peak_values;
};

/// Classifies the tail of a run: periodic when the last >= 5 inter-peak
/// gaps of x1 agree within period_tol, chattering when the impact sequence
/// accumulates, unresolved otherwise. Peaks before t_skip are discarded.
ControlOutcome classify_outcome(const Trajectory& traj, double t_skip = 50.0,
                                double period_tol = 0.02);

/// Runs the base system under delay feedback. Builds the history as the
/// run progresses and caps the step size at tau/4 so every delayed query
/// lands in committed history. Zero gain falls through to the plain run.
/// When `keep_history` is given the full history is moved there.
Trajectory simulate_controlled(const HybridSystem& base, double gain, double tau,
                               const State& init, double t_end, const StepControl& ctrl = {},
                               const ZenoOptions& zopts = {}, History* keep_history = nullptr);

}  // namespace chatter
