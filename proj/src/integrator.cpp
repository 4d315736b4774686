#include "chatter/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chatter {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Dormand-Prince 5(4) tableau (FSAL).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - bhat, the embedded 4th-order error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights (Hairer & Wanner continuous extension).
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

using Vec = std::array<double, DenseSegment::kMaxDim>;

// Guard-frame right-hand side of the flight dynamics.
struct FlightOde {
  const HybridSystem& sys;
  int dim;

  void operator()(double t, const Vec& y, Vec& dy) const {
    const double x = y[0] + sys.guard.position(t);
    const double v = y[1] + sys.guard.velocity(t);
    const double a = sys.field(x, v, t);
    dy[0] = y[1];
    dy[1] = a - sys.guard.acceleration(t);
    if (dim == 4) {
      const CoupledSpring& sp = *sys.spring;
      dy[2] = y[3];
      dy[3] = (-sp.stiffness * y[2] - sp.damping * y[3] + sp.forcing(x, v)) / sp.mass;
    }
    for (int i = 0; i < dim; ++i)
      if (!std::isfinite(dy[i]))
        throw NonFiniteState("vector field returned a non-finite value at t=" +
                             std::to_string(t));
  }
};

double err_norm(const Vec& yerr, const Vec& y0, const Vec& y1, int dim,
                const StepControl& ctrl) {
  double sum = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double sc = ctrl.abs_tol + ctrl.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = yerr[i] / sc;
    sum += q * q;
  }
  return std::sqrt(sum / dim);
}

// Hairer-style starting step size estimate.
double initial_step(const FlightOde& ode, double t0, const Vec& y0, const Vec& f0,
                    double span, const StepControl& ctrl) {
  const int dim = ode.dim;
  double d0 = 0.0, dd1 = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double sc = ctrl.abs_tol + ctrl.rel_tol * std::abs(y0[i]);
    d0 += (y0[i] / sc) * (y0[i] / sc);
    dd1 += (f0[i] / sc) * (f0[i] / sc);
  }
  d0 = std::sqrt(d0 / dim);
  dd1 = std::sqrt(dd1 / dim);

  double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * (d0 / dd1);
  h0 = std::min({h0, span, ctrl.dt_max});

  Vec y1{}, f1{};
  for (int i = 0; i < dim; ++i) y1[i] = y0[i] + h0 * f0[i];
  ode(t0 + h0, y1, f1);

  double d2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double sc = ctrl.abs_tol + ctrl.rel_tol * std::abs(y0[i]);
    const double q = (f1[i] - f0[i]) / sc;
    d2 += q * q;
  }
  d2 = std::sqrt(d2 / dim) / h0;

  const double dmax = std::max(dd1, d2);
  double h1 = dmax > 1e-15 ? std::pow(0.01 / dmax, 0.2) : std::max(1e-6, h0 * 1e-3);
  return std::max(ctrl.dt_min, std::min({100.0 * h0, h1, span, ctrl.dt_max}));
}

double ulp_width(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::max(4.0 * std::numeric_limits<double>::epsilon() * scale, 1e-18);
}

// Bracketed root refinement: secant candidates accelerated by bisection
// fallback. fa and fb must have opposite signs (fa > 0 >= fb or the
// reverse); refines until the bracket is a few ulp wide.
template <class F>
double refine_root(F&& f, double a, double b, double fa, double fb) {
  const double target = ulp_width(a, b);
  int since_shrink = 0;
  while (b - a > target) {
    double tm;
    const double denom = fb - fa;
    if (denom != 0.0 && since_shrink < 2) {
      tm = b - fb * (b - a) / denom;
      const double pad = 0.01 * (b - a);
      if (!(tm > a + pad && tm < b - pad)) tm = 0.5 * (a + b);
    } else {
      tm = 0.5 * (a + b);
      since_shrink = 0;
    }
    if (tm <= a || tm >= b) break;  // bracket exhausted at this precision
    const double fm = f(tm);
    const double width_before = b - a;
    if ((fa > 0.0 && fm > 0.0) || (fa <= 0.0 && fm <= 0.0)) {
      a = tm;
      fa = fm;
    } else {
      b = tm;
      fb = fm;
    }
    since_shrink = (b - a > 0.5 * width_before) ? since_shrink + 1 : 0;
  }
  return 0.5 * (a + b);
}

}  // namespace

double refine_bracketed_root(const std::function<double(double)>& f, double a, double b,
                             double fa, double fb) {
  return refine_root(f, a, b, fa, fb);
}

DenseSegment::DenseSegment(double t_start, double t_end, double step_width, int dim,
                           Guard frame, const std::array<std::array<double, 5>, kMaxDim>& rcont,
                           bool stuck)
    : ts_(t_start), te_(t_end), h_(step_width), dim_(dim), frame_(frame), rcont_(rcont),
      stuck_(stuck) {
  if (!(t_start < t_end))
    throw std::invalid_argument("dense segment requires t_start < t_end");
}

double DenseSegment::component(double t, int i) const {
  const double s = (t - ts_) / h_;
  const double s1 = 1.0 - s;
  const auto& r = rcont_[i];
  return r[0] + s * (r[1] + s1 * (r[2] + s * (r[3] + s1 * r[4])));
}

State DenseSegment::eval(double t) const {
  const double slack = ulp_width(ts_, te_);
  if (t < ts_ - slack || t > te_ + slack)
    throw OutOfRange("dense segment evaluated outside its span");
  t = std::clamp(t, ts_, te_);
  State out;
  out.t = t;
  out.y.resize(dim_);
  out.y[0] = component(t, 0) + frame_.position(t);
  out.y[1] = component(t, 1) + frame_.velocity(t);
  for (int i = 2; i < dim_; ++i) out.y[i] = component(t, i);
  return out;
}

void DenseSegment::truncate(double t_cut) {
  if (!(t_cut > ts_ && t_cut <= te_))
    throw std::invalid_argument("truncation point outside segment span");
  te_ = t_cut;
}

State dense_eval(const DenseSegment& segment, double t) { return segment.eval(t); }

namespace {

// Scans a fresh segment for the first guard crossing. Samples the gap at
// the endpoints plus 8 interior points; a start exactly on the surface
// with outbound velocity whose whole arc fits before the first sample is
// recovered by splitting at the velocity zero (the arc apex).
std::optional<double> first_crossing(const DenseSegment& seg, const StepControl& ctrl) {
  constexpr int kSamples = 9;  // subintervals between 10 sample points
  const double ta = seg.t_start();
  const double tb = seg.t_end();
  const auto gap = [&seg](double t) { return seg.guard_gap(t); };

  double t_prev = ta;
  double g_prev = gap(ta);
  for (int j = 1; j <= kSamples; ++j) {
    const double tj = (j == kSamples) ? tb : ta + (tb - ta) * j / kSamples;
    const double gj = gap(tj);
    if (g_prev > 0.0 && gj <= 0.0)
      return refine_root(gap, t_prev, tj, g_prev, gj);
    if (j == 1 && g_prev <= 0.0 && gj <= 0.0 && seg.relative_velocity(ta) > 0.0) {
      // Micro-arc entirely inside the first subinterval: the gap rose from
      // the surface and fell back before t1. Split at the apex.
      const auto relv = [&seg](double t) { return seg.relative_velocity(t); };
      const double wa = relv(ta);
      const double wb = relv(tj);
      if (wb < 0.0) {
        const double t_apex = refine_root(relv, ta, tj, wa, wb);
        const double g_apex = gap(t_apex);
        if (g_apex > 0.0) return refine_root(gap, t_apex, tj, g_apex, gj);
        return t_apex;  // arc never rose above round-off; contact at apex
      }
    }
    t_prev = tj;
    g_prev = gj;
    (void)ctrl;
  }
  return std::nullopt;
}

}  // namespace

double locate_event(const DenseSegment& segment, const Guard& guard, const StepControl& ctrl) {
  ctrl.validate();
  if (guard.same_surface(segment.frame())) {
    auto hit = first_crossing(segment, ctrl);
    if (!hit) throw NoSignChange("guard value does not change sign inside the segment");
    return *hit;
  }
  // Foreign guard: work on absolute coordinates via the interpolant.
  const auto g = [&](double t) {
    const State s = segment.eval(t);
    return guard.value(s.y[0], t);
  };
  constexpr int kScan = 32;
  const double ta = segment.t_start(), tb = segment.t_end();
  double t_prev = ta, g_prev = g(ta);
  for (int j = 1; j <= kScan; ++j) {
    const double tj = (j == kScan) ? tb : ta + (tb - ta) * j / kScan;
    const double gj = g(tj);
    if ((g_prev > 0.0 && gj <= 0.0) || (g_prev < 0.0 && gj >= 0.0))
      return refine_root(g, t_prev, tj, g_prev, gj);
    t_prev = tj;
    g_prev = gj;
  }
  throw NoSignChange("guard value does not change sign inside the segment");
}

IntegrateResult integrate_until_event_rel(const HybridSystem& system, double t0, double q0,
                                          double w0, const std::vector<double>& tail,
                                          double t_max, const StepControl& ctrl,
                                          const SegmentSink& sink) {
  ctrl.validate();
  const int dim = system.dimension();
  if (static_cast<int>(tail.size()) != dim - 2)
    throw std::invalid_argument("spring state size does not match system dimension");
  if (!(t_max > t0)) throw std::invalid_argument("integration span is empty");
  if (q0 < -10.0 * kPositionTol)
    throw std::invalid_argument("integration must start on or above the guard");

  StepControl local = ctrl;
  if (!system.guard.is_fixed())  // resolve the table: at most a quarter period per step
    local.dt_max = std::min(local.dt_max, kPi / (2.0 * system.guard.omega()));

  FlightOde ode{system, dim};
  IntegrateResult result;

  Vec y{}, k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, ytmp{}, yerr{};
  y[0] = q0;
  y[1] = w0;
  for (int i = 2; i < dim; ++i) y[i] = tail[i - 2];

  double t = t0;
  ode(t, y, k1);
  double h = local.dt_init > 0.0
                 ? std::min({local.dt_init, local.dt_max, t_max - t})
                 : initial_step(ode, t, y, k1, t_max - t, local);

  bool rejected = false;
  while (t < t_max) {
    h = std::min(h, t_max - t);
    if (h < local.dt_min)
      h = (t_max - t < local.dt_min) ? (t_max - t) : local.dt_min;

    // Stage evaluations.
    for (int i = 0; i < dim; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    ode(t + c2 * h, ytmp, k2);
    for (int i = 0; i < dim; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    ode(t + c3 * h, ytmp, k3);
    for (int i = 0; i < dim; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    ode(t + c4 * h, ytmp, k4);
    for (int i = 0; i < dim; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    ode(t + c5 * h, ytmp, k5);
    for (int i = 0; i < dim; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    ode(t + h, ytmp, k6);

    Vec ynew{};
    for (int i = 0; i < dim; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    ode(t + h, ynew, k7);

    for (int i = 0; i < dim; ++i)
      yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    const double err = err_norm(yerr, y, ynew, dim, local);
    if (err > 1.0) {
      if (h <= local.dt_min * (1.0 + 1e-12))
        throw StepSizeUnderflow("step size underflow at t=" + std::to_string(t));
      const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h = std::max(local.dt_min, h * fac);
      rejected = true;
      continue;
    }

    // Dense coefficients for the accepted step.
    std::array<std::array<double, 5>, DenseSegment::kMaxDim> rcont{};
    for (int i = 0; i < dim; ++i) {
      const double ydiff = ynew[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      rcont[i][0] = y[i];
      rcont[i][1] = ydiff;
      rcont[i][2] = bspl;
      rcont[i][3] = ydiff - h * k7[i] - bspl;
      rcont[i][4] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                         d7 * k7[i]);
    }
    DenseSegment seg(t, t + h, h, dim, system.guard, rcont);

    if (auto hit_t = first_crossing(seg, local)) {
      seg.truncate(*hit_t);
      result.segments.push_back(seg);
      if (sink) sink(seg);
      EventHit hit;
      hit.t = *hit_t;
      hit.gap = seg.guard_gap(*hit_t);
      hit.rel_velocity = seg.relative_velocity(*hit_t);
      hit.pre = seg.eval(*hit_t);
      result.event = hit;
      return result;
    }

    result.segments.push_back(seg);
    if (sink) sink(seg);

    t += h;
    k1 = k7;  // FSAL
    y = ynew;

    double fac = 0.9 * std::pow(std::max(err, 1e-32), -0.2);
    fac = std::min(rejected ? 1.0 : 6.0, std::max(0.2, fac));
    h = std::min(local.dt_max, h * fac);
    rejected = false;
  }
  return result;
}

IntegrateResult integrate_until_event(const HybridSystem& system, const State& start,
                                      double t_max, const StepControl& ctrl,
                                      const SegmentSink& sink) {
  if (start.dimension() != system.dimension())
    throw std::invalid_argument("state dimension does not match system dimension");
  const double q0 = start.y[0] - system.guard.position(start.t);
  const double w0 = start.y[1] - system.guard.velocity(start.t);
  std::vector<double> tail(start.y.begin() + 2, start.y.end());
  return integrate_until_event_rel(system, start.t, q0, w0, tail, t_max, ctrl, sink);
}

}  // namespace chatter
