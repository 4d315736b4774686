#include <doctest.h>

#include <cmath>

#include "chatter/report.hpp"

using namespace chatter;

namespace {

Trajectory ball_run(double t_end = 3.0) {
  VectorField f;
  f.accel = [](double, double, double) { return -9.8; };
  const HybridSystem sys{f, Guard::fixed(0.0), ImpactLaw(0.5), std::nullopt, std::nullopt};
  return simulate(sys, State(0.0, {2.0, 0.0}), t_end);
}

}  // namespace

TEST_CASE("trace records are sorted and pair up at impacts") {
  const Trajectory traj = ball_run();
  const auto trace = build_trace(traj);
  REQUIRE(!trace.empty());

  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i - 1].t <= trace[i].t);

  // every impact contributes a pre/post pair sharing its time
  std::size_t impact_records = 0;
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (trace[i].flag == TraceFlag::impact) ++impact_records;
  CHECK(impact_records == 2 * traj.impacts.size());

  // pre record carries the approach velocity, post the rebound
  for (const auto& ev : traj.impacts) {
    std::vector<const TraceRecord*> at_theta;
    for (const auto& rec : trace)
      if (rec.flag == TraceFlag::impact && rec.t == ev.theta) at_theta.push_back(&rec);
    REQUIRE(at_theta.size() == 2);
    CHECK(at_theta[0]->y[1] == ev.v_pre);
    CHECK(at_theta[1]->y[1] == ev.v_post);
  }

  // sticking samples are flagged
  bool has_stick = false;
  for (const auto& rec : trace) has_stick |= rec.flag == TraceFlag::stick;
  CHECK(has_stick);
}

TEST_CASE("csv output is deterministic across repeated runs") {
  const Trajectory a = ball_run();
  const Trajectory b = ball_run();
  const std::string csv_a = trace_to_csv(build_trace(a), 2);
  const std::string csv_b = trace_to_csv(build_trace(b), 2);
  CHECK(csv_a == csv_b);
  CHECK(csv_a.substr(0, csv_a.find('\n')) == "t,x1,x2,segment,flag");

  const auto report_a = simulation_report(a).dump();
  const auto report_b = simulation_report(b).dump();
  CHECK(report_a == report_b);
}

TEST_CASE("simulation report carries the accumulation analysis") {
  const Trajectory traj = ball_run();
  const auto j = simulation_report(traj);
  CHECK(j.at("schema") == 1);
  CHECK(j.at("verdict") == "chattering");
  CHECK(j.at("termination") == "zeno_detected");
  CHECK(j.at("impact_times").size() == traj.impacts.size());
  CHECK(j.at("n_impacts") == traj.impacts.size());
  const double theta_inf = j.at("theta_inf_estimate");
  CHECK(theta_inf == doctest::Approx(3.0 * std::sqrt(2.0 * 2.0 / 9.8)).epsilon(1e-6));
  CHECK(j.at("sticking").at("t_stick") == doctest::Approx(theta_inf));
}

TEST_CASE("full precision round-trips through the formatter") {
  const double values[] = {0.1, 1.0 / 3.0, 6.283185307179586, 1e-17, -123456.789012345678};
  for (double v : values) CHECK(std::stod(format_double(v)) == v);
}
