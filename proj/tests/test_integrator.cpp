#include <doctest.h>

#include <cmath>

#include "chatter/integrator.hpp"

using namespace chatter;

namespace {

HybridSystem free_fall(double phi = 0.0, double r = 0.5, double g = 9.8) {
  VectorField f;
  f.accel = [g](double, double, double) { return -g; };
  return HybridSystem{f, Guard::fixed(phi), ImpactLaw(r), std::nullopt, std::nullopt};
}

HybridSystem example1_system() {
  VectorField f;
  f.accel = [](double x, double v, double) { return -std::cos(v) - x * x * x; };
  return HybridSystem{f, Guard::fixed(2.0), ImpactLaw(0.8), std::nullopt, std::nullopt};
}

}  // namespace

TEST_CASE("free fall event matches the closed form") {
  const auto sys = free_fall();
  StepControl ctrl;
  auto res = integrate_until_event(sys, State(0.0, {2.0, 0.0}), 2.0, ctrl);
  REQUIRE(res.event.has_value());

  const double theta = std::sqrt(2.0 * 2.0 / 9.8);  // 0.63887656499994...
  CHECK(res.event->t == doctest::Approx(theta).epsilon(1e-13));
  CHECK(res.event->pre.y[1] == doctest::Approx(-9.8 * theta).epsilon(1e-12));
  CHECK(std::abs(res.event->gap) < kPositionTol);

  // segments tile [0, event] without gaps
  double t_prev = 0.0;
  for (const auto& seg : res.segments) {
    CHECK(seg.t_start() == doctest::Approx(t_prev).epsilon(1e-15));
    t_prev = seg.t_end();
  }
  CHECK(t_prev == res.event->t);
}

TEST_CASE("no event before t_max leaves the quadratic arc endpoint") {
  const auto sys = free_fall();
  auto res = integrate_until_event(sys, State(0.0, {2.0, 0.0}), 0.1, StepControl{});
  CHECK(!res.event.has_value());
  const State end = res.segments.back().end_state();
  CHECK(end.t == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(end.y[0] == doctest::Approx(2.0 - 0.049).epsilon(1e-13));
}

TEST_CASE("first contact of the cubic oscillator obeys the proof bound") {
  auto res = integrate_until_event(example1_system(), State(0.0, {2.1, 0.0}), 2.0,
                                   StepControl{});
  REQUIRE(res.event.has_value());
  CHECK(res.event->t < std::sqrt(2.0 * (2.5 - 2.0) / 7.0));  // < 0.3780
  CHECK(res.event->t > 0.0);
}

TEST_CASE("locate_event refines the analytic root of a parabolic arc") {
  // A segment of x(t) = 2 - 4.9 t^2 spanning [0.6, 0.7]; the frame guard
  // sits far below so no crossing interferes with producing the segment.
  const auto sys = free_fall(-10.0);
  StepControl ctrl;
  auto to_start = integrate_until_event(sys, State(0.0, {2.0, 0.0}), 0.6, ctrl);
  const State at = to_start.segments.back().end_state();

  ctrl.dt_init = 0.1;
  ctrl.dt_max = 0.1;
  auto span = integrate_until_event(sys, at, 0.7, ctrl);
  const DenseSegment& seg = span.segments.back();
  REQUIRE(seg.t_end() == doctest::Approx(0.7).epsilon(1e-15));

  const double root = locate_event(seg, Guard::fixed(0.0), ctrl);
  CHECK(std::abs(root - std::sqrt(2.0 / 4.9)) <= 1e-12);

  CHECK_THROWS_AS(locate_event(seg, Guard::fixed(-20.0), ctrl), NoSignChange);
}

TEST_CASE("locate_event on a vibrating-table crossing re-evaluates on the surface") {
  VectorField f;
  f.accel = [](double, double, double) { return -9.8; };
  const HybridSystem sys{f, Guard::sinusoidal(1.0, 0.29), ImpactLaw(0.9), std::nullopt,
                         std::nullopt};
  auto res = integrate_until_event(sys, State(0.0, {1.9, 0.0}), 5.0, StepControl{});
  REQUIRE(res.event.has_value());
  const double t_star = res.event->t;
  const double x_star = res.event->pre.y[0];
  CHECK(std::abs(x_star - std::sin(0.29 * t_star)) < kPositionTol);
}

TEST_CASE("dense output endpoints and interior values") {
  const auto sys = free_fall(-10.0);
  auto res = integrate_until_event(sys, State(0.0, {2.0, 0.0}), 0.5, StepControl{});
  const DenseSegment& seg = res.segments.front();

  const State s0 = dense_eval(seg, seg.t_start());
  const State s1 = dense_eval(seg, seg.t_end());
  CHECK(s0.y[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s1.y[0] == doctest::Approx(seg.end_state().y[0]).epsilon(1e-15));

  const double tm = 0.5 * (seg.t_start() + seg.t_end());
  const State sm = dense_eval(seg, tm);
  CHECK(sm.y[0] == doctest::Approx(2.0 - 4.9 * tm * tm).epsilon(1e-12));
  CHECK(sm.y[1] == doctest::Approx(-9.8 * tm).epsilon(1e-12));

  CHECK_THROWS_AS(dense_eval(seg, seg.t_end() + 0.1), OutOfRange);
  CHECK_THROWS_AS(dense_eval(seg, seg.t_start() - 0.1), OutOfRange);
}

TEST_CASE("tolerance controls the endpoint error of a smooth oscillation") {
  // x'' = -x from (1, 0) has x = cos(t); the guard sits below the motion.
  VectorField f;
  f.accel = [](double x, double, double) { return -x; };
  const HybridSystem sys{f, Guard::fixed(-2.0), ImpactLaw(0.5), std::nullopt, std::nullopt};

  const auto endpoint_error = [&](double rel_tol) {
    StepControl ctrl;
    ctrl.rel_tol = rel_tol;
    ctrl.abs_tol = rel_tol * 1e-2;
    auto res = integrate_until_event(sys, State(0.0, {1.0, 0.0}), 10.0, ctrl);
    const State end = res.segments.back().end_state();
    return std::abs(end.y[0] - std::cos(10.0));
  };

  const double coarse = endpoint_error(1e-6);
  const double fine = endpoint_error(1e-9);
  CHECK(fine < coarse);
  CHECK(coarse < 1e-4);
  CHECK(fine < 1e-7);
}

TEST_CASE("the first crossing is reported, not a later one") {
  // Free fall through a fast table: several guard crossings exist in the
  // span; compare against a brute-force scan of the closed form.
  VectorField f;
  f.accel = [](double, double, double) { return -9.8; };
  const HybridSystem sys{f, Guard::sinusoidal(1.0, 2.0), ImpactLaw(0.5), std::nullopt,
                         std::nullopt};
  auto res = integrate_until_event(sys, State(0.0, {3.0, 0.0}), 5.0, StepControl{});
  REQUIRE(res.event.has_value());

  const auto g = [](double t) { return (3.0 - 4.9 * t * t) - std::sin(2.0 * t); };
  double brute = -1.0;
  double prev = g(0.0);
  for (int i = 1; i <= 500000; ++i) {
    const double t = 5.0 * i / 500000.0;
    const double cur = g(t);
    if (prev > 0.0 && cur <= 0.0) {
      double a = 5.0 * (i - 1) / 500000.0, b = t, fa = prev, fb = cur;
      brute = refine_bracketed_root(g, a, b, fa, fb);
      break;
    }
    prev = cur;
  }
  REQUIRE(brute > 0.0);
  CHECK(res.event->t == doctest::Approx(brute).epsilon(1e-9));
}

TEST_CASE("non-finite fields are reported") {
  VectorField f;
  f.accel = [](double x, double, double) {
    return x < 1.0 ? std::numeric_limits<double>::quiet_NaN() : -9.8;
  };
  const HybridSystem sys{f, Guard::fixed(-5.0), ImpactLaw(0.5), std::nullopt, std::nullopt};
  CHECK_THROWS_AS(integrate_until_event(sys, State(0.0, {2.0, 0.0}), 3.0, StepControl{}),
                  NonFiniteState);
}

TEST_CASE("unresolvable roughness underflows the step size") {
  VectorField f;
  f.accel = [](double, double, double t) { return -9.8 + 1e6 * std::sin(1e16 * t); };
  const HybridSystem sys{f, Guard::fixed(-5.0), ImpactLaw(0.5), std::nullopt, std::nullopt};
  StepControl ctrl;
  ctrl.dt_min = 1e-12;
  CHECK_THROWS_AS(integrate_until_event(sys, State(0.0, {2.0, 0.0}), 1.0, ctrl),
                  StepSizeUnderflow);
}

TEST_CASE("step control validation") {
  StepControl ctrl;
  ctrl.rel_tol = 0.0;
  CHECK_THROWS_AS(ctrl.validate(), std::invalid_argument);
  ctrl = StepControl{};
  ctrl.dt_min = 2.0;
  CHECK_THROWS_AS(ctrl.validate(), std::invalid_argument);
}
