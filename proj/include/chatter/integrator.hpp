// Adaptive Dormand-Prince 5(4) integration of the flight dynamics with a
// 4th-order dense output and guard-event localization.
//
// Integration runs in the guard frame: the state is (q, w) with
// q = x - X(t) (gap above the surface) and w = x' - X'(t) (relative
// velocity), plus the untransformed spring pair when present. Near a
// chattering accumulation the flight arcs shrink to heights around 1e-17;
// the gap coordinate keeps full floating-point resolution there, where the
// absolute coordinate x would be quantized at ulp(phi). Public inputs and
// outputs stay in absolute coordinates.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "chatter/model.hpp"

namespace chatter {

struct StepSizeUnderflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoSignChange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepControl {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double dt_min = 1e-14;
  double dt_max = 1.0;
  double event_tol = 1e-12;  // guaranteed upper bound on the event bracket width
  double dt_init = 0.0;      // 0 = choose automatically

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw std::invalid_argument("step control: tolerances must be positive");
    if (!(dt_min > 0.0) || !(dt_min < dt_max))
      throw std::invalid_argument("step control: requires 0 < dt_min < dt_max");
    if (!(event_tol > 0.0))
      throw std::invalid_argument("step control: event tolerance must be positive");
  }
};

/// One accepted integration step (or sticking span) with its interpolant.
/// Coefficients live in the guard frame of `frame()`; eval() converts back
/// to absolute coordinates. A segment truncated at an event keeps its
/// original step width for interpolation, so evaluation stays valid on the
/// retained span [t_start, t_end].
class DenseSegment {
 public:
  static constexpr int kMaxDim = 4;

  DenseSegment(double t_start, double t_end, double step_width, int dim, Guard frame,
               const std::array<std::array<double, 5>, kMaxDim>& rcont, bool stuck = false);

  double t_start() const { return ts_; }
  double t_end() const { return te_; }
  int dimension() const { return dim_; }
  const Guard& frame() const { return frame_; }
  bool stuck() const { return stuck_; }

  /// Absolute-coordinate state at t; throws OutOfRange outside the span
  /// (with a small slack for round-off).
  State eval(double t) const;

  /// Gap q(t) above the frame surface, evaluated directly in the guard
  /// frame. Exact where absolute coordinates would lose the surface.
  double guard_gap(double t) const { return component(t, 0); }

  /// Relative velocity w(t) in the guard frame.
  double relative_velocity(double t) const { return component(t, 1); }

  /// Raw guard-frame component (0 = gap, 1 = relative velocity, 2, 3 = spring).
  double component(double t, int i) const;

  /// Shorten the valid span to [t_start, t_cut]; interpolation data is kept.
  void truncate(double t_cut);

  /// Tags the segment as a surface-following (sticking) span.
  void mark_stuck() { stuck_ = true; }

  State start_state() const { return eval(ts_); }
  State end_state() const { return eval(te_); }

 private:
  double ts_, te_;
  double h_;  // original step width used to normalize the interpolation variable
  int dim_;
  Guard frame_;
  std::array<std::array<double, 5>, kMaxDim> rcont_;
  bool stuck_;
};

/// First guard contact found by the stepper.
struct EventHit {
  double t = 0.0;
  State pre;             // absolute pre-impact state interpolated at t
  double gap = 0.0;      // q(t), residual gap at the localized root
  double rel_velocity = 0.0;  // w(t), exact relative approach velocity
};

using SegmentSink = std::function<void(const DenseSegment&)>;

struct IntegrateResult {
  std::vector<DenseSegment> segments;
  std::optional<EventHit> event;
};

/// Integrates the flight dynamics from `start` until the guard value
/// crosses zero or t reaches t_max. Requires guard_value(start) > 0, or a
/// start exactly on the guard moving away from it. Accepted segments tile
/// the integrated span and are also handed to `sink` as they are produced
/// (delay-feedback histories rely on that ordering).
IntegrateResult integrate_until_event(const HybridSystem& system, const State& start,
                                      double t_max, const StepControl& ctrl,
                                      const SegmentSink& sink = {});

/// Guard-frame entry point used for exact flight-to-flight continuation:
/// starts from gap q0 and relative velocity w0 at time t0 without a round
/// trip through absolute coordinates. `tail` carries the spring pair.
IntegrateResult integrate_until_event_rel(const HybridSystem& system, double t0, double q0,
                                          double w0, const std::vector<double>& tail,
                                          double t_max, const StepControl& ctrl,
                                          const SegmentSink& sink = {});

/// First zero of the guard value inside the segment, refined by bracketing
/// bisection with secant acceleration down to max(event floor, a few ulp).
/// Throws NoSignChange if the guard value does not change sign.
double locate_event(const DenseSegment& segment, const Guard& guard, const StepControl& ctrl);

/// Bracketed scalar root refinement shared by event, apex and release
/// localization: secant candidates with bisection fallback, refined to a
/// few ulp of the abscissa. fa and fb must straddle zero.
double refine_bracketed_root(const std::function<double(double)>& f, double a, double b,
                             double fa, double fb);

/// Interpolated absolute state; throws OutOfRange outside [t_start, t_end].
State dense_eval(const DenseSegment& segment, double t);

}  // namespace chatter
