// Flight-impact orchestration: repeated guard events, Zeno detection with
// accumulation-time extrapolation, sticking dynamics with a release rule,
// and the truncated (capped-impact) approximation.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chatter/integrator.hpp"
#include "chatter/model.hpp"

namespace chatter {

struct PenetrationDetected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewImpacts : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DisjointWindows : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ImpactEvent {
  double theta = 0.0;   // impact time
  double x = 0.0;       // contact position (on the guard)
  double v_pre = 0.0;   // absolute pre-impact velocity
  double v_post = 0.0;  // absolute post-impact velocity
  int index = 0;        // 1-based, strictly increasing with theta
};

enum class Termination { reached_t_end, zeno_detected, impact_cap, error };

struct StickingInfo {
  double t_stick = 0.0;  // estimated accumulation time the surface phase stands in for
  std::string mode;
};

struct Trajectory {
  std::vector<DenseSegment> segments;  // flight and sticking spans, tiling [t_begin, t_final]
  std::vector<ImpactEvent> impacts;
  std::optional<StickingInfo> sticking;
  std::vector<double> releases;  // times where a sticking phase ended in lift-off
  Termination termination = Termination::reached_t_end;
  double t_begin = 0.0;
  double t_final = 0.0;

  /// Interpolated absolute state; throws OutOfRange outside the covered span.
  State eval(double t) const;
};

struct ZenoOptions {
  double min_gap = 1e-8;       // inter-impact gap below which accumulation is declared
  double stick_speed = 1e-8;   // relative rebound speed below which the body is at rest
  long impact_cap = 1000000;   // hard safety cap on the impact count
  int ratio_window = 10;
  double ratio_margin = 0.05;  // chattering requires terminal ratio < 1 - margin

  void validate() const {
    if (!(min_gap > 0.0) || !(stick_speed > 0.0) || impact_cap <= 0 || ratio_window <= 0 ||
        !(ratio_margin > 0.0))
      throw std::invalid_argument("zeno options must be positive");
  }
};

enum class ZenoVerdict { chattering, no_accumulation, inconclusive };

struct ZenoReport {
  std::vector<double> impact_times;
  std::vector<double> gaps;    // gaps[i] = t[i+1] - t[i]
  std::vector<double> ratios;  // ratios[i] = gaps[i+1] / gaps[i]
  double terminal_ratio = std::numeric_limits<double>::quiet_NaN();
  double theta_inf = std::numeric_limits<double>::quiet_NaN();
  ZenoVerdict verdict = ZenoVerdict::inconclusive;
};

/// Runs the hybrid system from `init` until t_end. Alternates flight and
/// impact; when the Zeno criterion fires (gap below min_gap or rebound
/// speed below stick_speed) the remaining accumulation is replaced by a
/// sticking phase, which may later release if the constraint reaction
/// changes sign. Segments are forwarded to `sink` as they are produced.
Trajectory simulate(const HybridSystem& system, const State& init, double t_end,
                    const StepControl& ctrl = {}, const ZenoOptions& zopts = {},
                    const SegmentSink& sink = {});

/// As simulate, but impact processing stops after `cap` impacts (default
/// 0 resolves to floor(1/r)) and the body is placed on the surface from
/// that moment on. Coincides with the full run up to the capped impact.
Trajectory simulate_truncated(const HybridSystem& system, const State& init, double t_end,
                              const StepControl& ctrl = {}, const ZenoOptions& zopts = {},
                              const SegmentSink& sink = {}, long cap = 0);

/// Surface phase starting from `at` (a state on the guard): the impacting
/// pair follows the surface while the constraint reaction stays
/// nonnegative; the spring pair keeps integrating. On a reaction sign
/// change the phase ends with a release time.
struct StickingResult {
  std::vector<DenseSegment> segments;
  std::optional<double> release_time;
};
StickingResult sticking_dynamics(const HybridSystem& system, const State& at, double t_end,
                                 const StepControl& ctrl = {}, const SegmentSink& sink = {});

/// Gap/ratio analysis of an impact sequence. Requires >= 3 impacts.
/// The terminal ratio is the geometric mean of the last `ratio_window`
/// ratios; chattering additionally requires monotonically decreasing gaps
/// over that window. theta_inf extrapolates the geometric tail beyond the
/// last impact using the measured terminal ratio.
ZenoReport detect_zeno(const std::vector<ImpactEvent>& impacts, const ZenoOptions& zopts = {});

/// Interior zeros of the velocity on each flight arc (plus an arc start at
/// exact rest), localized on the dense output.
std::vector<double> apex_times(const Trajectory& traj);

struct TrajectoryDelta {
  double position = 0.0;
  double velocity = 0.0;
};

/// Sup-norm difference of two trajectories on a uniform grid over their
/// common time window. Throws DisjointWindows if the windows do not meet.
TrajectoryDelta compare_trajectories(const Trajectory& a, const Trajectory& b, int grid_n);

/// Minimum guard gap over `samples` interior points of every segment;
/// the non-penetration invariant asserts this stays above -10 * kPositionTol.
double min_guard_gap(const Trajectory& traj, int samples_per_segment = 100);

/// Measured gap ratio against the field-bound ratio estimate for each
/// consecutive impact triple: bound = r * max|f| / min|f| sampled along
/// the trajectory over the two arcs.
struct RatioBoundSample {
  int index = 0;
  double ratio = 0.0;
  double bound = 0.0;
};
std::vector<RatioBoundSample> ratio_bound_check(const Trajectory& traj,
                                                const VectorField& field, double restitution,
                                                int samples_per_arc = 200);

}  // namespace chatter
