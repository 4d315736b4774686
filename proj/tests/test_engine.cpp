#include <doctest.h>

#include <cmath>
#include <vector>

#include "chatter/engine.hpp"

using namespace chatter;

namespace {

HybridSystem free_fall(double phi = 0.0, double r = 0.5, double g = 9.8) {
  VectorField f;
  f.accel = [g](double, double, double) { return -g; };
  return HybridSystem{f, Guard::fixed(phi), ImpactLaw(r), std::nullopt, std::nullopt};
}

HybridSystem example1_system(double r = 0.8) {
  VectorField f;
  f.accel = [](double x, double v, double) { return -std::cos(v) - x * x * x; };
  return HybridSystem{f, Guard::fixed(2.0), ImpactLaw(r), std::nullopt, std::nullopt};
}

// Closed-form bouncing-ball impact times: theta_1 = sqrt(2 x0 / g), then
// gaps of 2 v1 r^i / g with v1 = g theta_1.
std::vector<double> ball_impact_times(double x0, double g, double r, int n) {
  std::vector<double> t;
  const double theta1 = std::sqrt(2.0 * x0 / g);
  const double v1 = g * theta1;
  double theta = theta1;
  double gap = 2.0 * v1 * r / g;
  for (int i = 0; i < n; ++i) {
    t.push_back(theta);
    theta += gap;
    gap *= r;
  }
  return t;
}

}  // namespace

TEST_CASE("bouncing ball reproduces the closed-form accumulation") {
  const auto sys = free_fall();
  const Trajectory traj = simulate(sys, State(0.0, {2.0, 0.0}), 3.0);

  REQUIRE(traj.impacts.size() >= 20);
  const auto oracle = ball_impact_times(2.0, 9.8, 0.5, 20);
  for (int i = 0; i < 20; ++i)
    CHECK(std::abs(traj.impacts[i].theta - oracle[i]) <= 1e-9);

  const ZenoReport rep = detect_zeno(traj.impacts);
  CHECK(rep.verdict == ZenoVerdict::chattering);
  for (double rho : rep.ratios) CHECK(rho == doctest::Approx(0.5).epsilon(1e-6));

  const double theta1 = std::sqrt(2.0 * 2.0 / 9.8);
  CHECK(rep.theta_inf == doctest::Approx(3.0 * theta1).epsilon(1e-7));  // 1.9166...
  CHECK(traj.termination == Termination::zeno_detected);
  REQUIRE(traj.sticking.has_value());
  CHECK(traj.sticking->t_stick > traj.impacts.back().theta);

  // after the accumulation the ball rests on the floor
  const State rest = traj.eval(2.5);
  CHECK(rest.y[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rest.y[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("stored impacts satisfy the impact map exactly") {
  const auto sys = free_fall();
  const Trajectory traj = simulate(sys, State(0.0, {2.0, 0.0}), 3.0);
  for (const auto& ev : traj.impacts) {
    CHECK(ev.v_post == apply_impact(sys.impact, ev.v_pre, sys.guard.velocity(ev.theta)));
    CHECK(std::abs(guard_value(sys.guard, ev.x, ev.theta)) <= kPositionTol);
    // fixed guard: post/pre kinetic energy ratio is exactly r^2 to round-off
    CHECK(ev.v_post * ev.v_post ==
          doctest::Approx(0.25 * ev.v_pre * ev.v_pre).epsilon(1e-14));
  }
  CHECK(min_guard_gap(traj) >= -10.0 * kPositionTol);
}

TEST_CASE("starting at rest on the surface sticks immediately") {
  const auto sys = example1_system();
  const Trajectory traj = simulate(sys, State(0.0, {2.0, 0.0}), 4.0);
  CHECK(traj.impacts.empty());
  CHECK(traj.termination == Termination::reached_t_end);
  REQUIRE(traj.sticking.has_value());
  for (double t : {0.5, 1.7, 3.9}) {
    const State s = traj.eval(t);
    CHECK(s.y[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.y[1] == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("sticking persists while the reaction stays nonnegative") {
  // Example 1 field pins the body at the wall: f(2, 0) = -9 < 0.
  const auto sys = example1_system();
  auto res = sticking_dynamics(sys, State(0.0, {2.0, 0.0}), 5.0);
  CHECK(!res.release_time.has_value());
  REQUIRE(!res.segments.empty());
  CHECK(res.segments.back().t_end() == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(res.segments.front().stuck());
}

TEST_CASE("sticking on the vibrating table follows the surface") {
  VectorField f;
  f.accel = [](double, double, double) { return -9.8; };
  const HybridSystem sys{f, Guard::sinusoidal(1.0, 0.29), ImpactLaw(0.9), std::nullopt,
                         std::nullopt};
  const double t0 = 3.141592653589793 / (2.0 * 0.29);
  auto res = sticking_dynamics(sys, State(t0, {1.0, 0.0}), t0 + 30.0);
  CHECK(!res.release_time.has_value());  // reaction = 9.8 - 0.0841 sin(.) > 0 always

  const double tq = t0 + 11.3;
  State s;
  for (const auto& seg : res.segments)
    if (tq >= seg.t_start() && tq <= seg.t_end()) s = seg.eval(tq);
  CHECK(s.y[0] == doctest::Approx(std::sin(0.29 * tq)).epsilon(1e-14));
  CHECK(s.y[1] == doctest::Approx(0.29 * std::cos(0.29 * tq)).epsilon(1e-14));
}

TEST_CASE("a reaction sign change releases the body") {
  // f(phi, 0, t) = t - 1 pushes the body off the wall from t = 1 on.
  VectorField f;
  f.accel = [](double, double, double t) { return t - 1.0; };
  const HybridSystem sys{f, Guard::fixed(2.0), ImpactLaw(0.5), std::nullopt, std::nullopt};
  auto res = sticking_dynamics(sys, State(0.0, {2.0, 0.0}), 5.0);
  REQUIRE(res.release_time.has_value());
  CHECK(*res.release_time == doctest::Approx(1.0).epsilon(1e-10));

  // through simulate: stick, release, then fly off the guard
  const Trajectory traj = simulate(sys, State(0.0, {2.0, 0.0}), 3.0);
  REQUIRE(traj.releases.size() == 1);
  CHECK(traj.releases[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(traj.eval(3.0).y[0] > 2.0);
  CHECK(traj.termination == Termination::reached_t_end);
}

TEST_CASE("truncated runs cap the impact count at floor(1/r)") {
  const auto sys_half = free_fall(0.0, 0.5);
  const Trajectory full = simulate(sys_half, State(0.0, {2.0, 0.0}), 3.0);
  const Trajectory trunc = simulate_truncated(sys_half, State(0.0, {2.0, 0.0}), 3.0);
  CHECK(trunc.impacts.size() == 2);  // floor(1/0.5)

  const Trajectory trunc9 =
      simulate_truncated(free_fall(0.0, 0.9), State(0.0, {2.0, 0.0}), 3.0);
  CHECK(trunc9.impacts.size() == 1);  // floor(1/0.9)

  // identical before the capped impact, different after it
  const double theta2 = full.impacts[1].theta;
  for (int k = 0; k < 50; ++k) {
    const double t = theta2 * k / 50.0;
    CHECK(full.eval(t).y[0] == doctest::Approx(trunc.eval(t).y[0]).epsilon(1e-12));
  }
  // apex of the third arc: the full run is near its bounce height there
  REQUIRE(full.impacts.size() >= 3);
  const double mid = 0.5 * (full.impacts[1].theta + full.impacts[2].theta);
  CHECK(std::abs(full.eval(mid).y[0] - trunc.eval(mid).y[0]) > 1e-2);
  CHECK(trunc.eval(mid).y[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("detect_zeno on synthetic sequences") {
  ZenoOptions zopts;

  SUBCASE("exact geometric gaps") {
    std::vector<ImpactEvent> impacts;
    double theta = 0.6389, gap = 0.6389;
    for (int i = 1; i <= 12; ++i) {
      impacts.push_back({theta, 0.0, -1.0, 0.5, i});
      theta += gap;
      gap *= 0.5;
    }
    // theta held by the last impact; the tail sums to theta1 * 3 = 1.9167
    const ZenoReport rep = detect_zeno(impacts, zopts);
    CHECK(rep.verdict == ZenoVerdict::chattering);
    CHECK(rep.terminal_ratio == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.theta_inf == doctest::Approx(3.0 * 0.6389).epsilon(1e-9));
  }

  SUBCASE("constant gaps mean no accumulation") {
    std::vector<ImpactEvent> impacts;
    for (int i = 1; i <= 10; ++i) impacts.push_back({0.3 * i, 0.0, -1.0, 0.5, i});
    CHECK(detect_zeno(impacts, zopts).verdict == ZenoVerdict::no_accumulation);
  }

  SUBCASE("too few impacts") {
    std::vector<ImpactEvent> impacts = {{0.1, 0, -1, 0.5, 1}, {0.2, 0, -1, 0.5, 2}};
    CHECK_THROWS_AS(detect_zeno(impacts, zopts), TooFewImpacts);
  }
}

TEST_CASE("apex times sit at arc midpoints of the bouncing ball") {
  const auto sys = free_fall();
  const Trajectory traj = simulate(sys, State(0.0, {2.0, 0.0}), 3.0);
  const auto apexes = apex_times(traj);
  REQUIRE(apexes.size() >= 5);

  // initial descent starts at rest: first apex at t = 0
  CHECK(apexes.front() == doctest::Approx(0.0).epsilon(1e-15));

  // each interior apex is the midpoint of its impact interval (parabola)
  for (std::size_t i = 0; i + 1 < traj.impacts.size() && i < 8; ++i) {
    const double mid = 0.5 * (traj.impacts[i].theta + traj.impacts[i + 1].theta);
    double best = 1e9;
    for (double xi : apexes) best = std::min(best, std::abs(xi - mid));
    CHECK(best <= 1e-10);
  }
}

TEST_CASE("trajectory comparison") {
  const auto sys = free_fall();
  const Trajectory a = simulate(sys, State(0.0, {2.0, 0.0}), 3.0);
  const Trajectory b = simulate(sys, State(0.0, {2.0, 0.0}), 3.0);
  const auto same = compare_trajectories(a, b, 500);
  CHECK(same.position == 0.0);
  CHECK(same.velocity == 0.0);

  const Trajectory c = simulate(sys, State(10.0, {2.0, 0.0}), 13.0);
  CHECK_THROWS_AS(compare_trajectories(a, c, 100), DisjointWindows);
}

TEST_CASE("ratio bound holds along a certified chattering run") {
  const auto sys = example1_system();
  StepControl ctrl;
  ctrl.rel_tol = 1e-12;
  ctrl.abs_tol = 1e-14;
  const Trajectory traj = simulate(sys, State(0.0, {2.1, 0.0}), 2.0, ctrl);
  REQUIRE(traj.impacts.size() >= 10);
  const auto samples = ratio_bound_check(traj, sys.field, 0.8);
  REQUIRE(!samples.empty());
  for (const auto& s : samples) CHECK(s.ratio <= s.bound + 1e-6);
}

TEST_CASE("impact cap halts the run") {
  ZenoOptions zopts;
  zopts.impact_cap = 5;
  const Trajectory traj = simulate(free_fall(), State(0.0, {2.0, 0.0}), 3.0, {}, zopts);
  CHECK(traj.impacts.size() == 5);
  CHECK(traj.termination == Termination::impact_cap);
  CHECK(traj.t_final == traj.impacts.back().theta);
}

TEST_CASE("coupled spring pair rides through the chatter window") {
  VectorField f;
  f.accel = [](double, double, double) { return -9.8; };
  CoupledSpring spring;
  spring.forcing = [](double, double x2) { return 20.0 * x2 * x2; };
  const HybridSystem sys{f, Guard::fixed(1.0), ImpactLaw(0.9), std::nullopt, spring};

  const Trajectory traj = simulate(sys, State(0.0, {6.0, 0.0, 10.0, -1000.0}), 8.0);
  CHECK(traj.impacts.size() >= 3);
  const State s = traj.eval(8.0);
  CHECK(std::isfinite(s.y[2]));
  CHECK(std::isfinite(s.y[3]));
  // the spring keeps evolving between impacts
  CHECK(std::abs(traj.eval(1.5).y[2] - traj.eval(3.0).y[2]) > 0.0);
}
