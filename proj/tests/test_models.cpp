#include <doctest.h>

#include <cmath>

#include "chatter/engine.hpp"
#include "chatter/models.hpp"

using namespace chatter;

TEST_CASE("catalog lists the seven built-in models") {
  const auto& cat = catalog();
  REQUIRE(cat.size() == 7);
  const char* expected[] = {"example1", "bouncing_ball", "vibrating_table", "moon_holmes",
                            "moon_holmes_autonomous", "coupled_chatter", "pyragas_example1"};
  for (int i = 0; i < 7; ++i) CHECK(cat[i].name == expected[i]);
}

TEST_CASE("example1 defaults") {
  const auto inst = instantiate("example1");
  CHECK(inst.system.guard.is_fixed());
  CHECK(inst.system.guard.phi() == 2.0);
  CHECK(inst.system.impact.restitution() == 0.8);
  CHECK(inst.init.t == 0.0);
  CHECK(inst.init.y[0] == 2.1);
  CHECK(inst.init.y[1] == 0.0);
  REQUIRE(inst.system.domain.has_value());
  CHECK(inst.system.domain->lower() == 2.0);
  CHECK(inst.system.domain->upper() == 2.5);
  CHECK(inst.system.domain->speed_bound() == 7.0);
  CHECK(inst.system.field(2.0, 0.0, 0.0) == doctest::Approx(-9.0).epsilon(1e-15));
}

TEST_CASE("vibrating table defaults start one period in") {
  const auto inst = instantiate("vibrating_table");
  CHECK(!inst.system.guard.is_fixed());
  CHECK(inst.system.guard.amplitude() == 1.0);
  CHECK(inst.system.guard.omega() == 0.29);
  CHECK(inst.system.impact.restitution() == 0.9);
  CHECK(inst.init.t == doctest::Approx(2.0 * 3.14159265358979 / 0.29).epsilon(1e-12));
  CHECK(inst.init.y[0] == 1.9);
  REQUIRE(inst.system.domain.has_value());
  CHECK(inst.system.domain->lower() == doctest::Approx(0.1));
}

TEST_CASE("autonomous beam model carries the cubic field and its box") {
  const auto inst = instantiate("moon_holmes_autonomous");
  CHECK(inst.system.field(1.5, 0.0, 0.0) == doctest::Approx(-1.875).epsilon(1e-15));
  CHECK(inst.system.field(1.1, 0.0, 0.0) == doctest::Approx(-0.231).epsilon(1e-12));
  REQUIRE(inst.system.domain.has_value());
  CHECK(inst.system.domain->lower() == 1.1);
  CHECK(inst.system.domain->upper() == 1.5);
  CHECK(inst.system.domain->speed_bound() == 3.0);
  CHECK(inst.init.y[0] == 1.3);
  CHECK(inst.system.impact.restitution() == 0.9);
}

TEST_CASE("coupled model wires the spring stage") {
  const auto inst = instantiate("coupled_chatter");
  CHECK(inst.system.dimension() == 4);
  REQUIRE(inst.system.spring.has_value());
  CHECK(inst.system.spring->stiffness == 2.0);
  CHECK(inst.system.spring->damping == 3.0);
  CHECK(inst.system.spring->mass == 1.0);
  CHECK(inst.system.spring->forcing(0.0, 3.0) == doctest::Approx(180.0));  // 20 x2^2
  CHECK(inst.init.y == std::vector<double>{6.0, 0.0, 10.0, -1000.0});
  CHECK(inst.system.guard.phi() == 1.0);
}

TEST_CASE("pyragas model carries its control block") {
  const auto inst = instantiate("pyragas_example1");
  REQUIRE(inst.control.has_value());
  CHECK(inst.control->gain == -30.0);
  CHECK(inst.control->tau == 1.0);
  CHECK(inst.system.impact.restitution() == 0.6);
  CHECK(inst.init.y[0] == 3.0);
}

TEST_CASE("overrides apply on top of the defaults") {
  const auto inst = instantiate("bouncing_ball", {{"r", 0.5}, {"x0", 2.0}});
  CHECK(inst.system.impact.restitution() == 0.5);
  CHECK(inst.init.y[0] == 2.0);
  CHECK(inst.system.field(1.0, 0.0, 0.0) == -9.8);

  // x0 aliases the first coordinate of four-state and controlled models
  const auto pyragas = instantiate("pyragas_example1", {{"x0", 5.0}});
  CHECK(pyragas.init.y[0] == 5.0);

  CHECK_THROWS_AS(instantiate("no_such_model"), UnknownModel);
  CHECK_THROWS_AS(instantiate("example1", {{"bogus", 1.0}}), UnknownParameter);
  CHECK_THROWS_AS(instantiate("example1", {{"r", 1.2}}), std::invalid_argument);
}

TEST_CASE("unforced spring subsystem decays along the closed form") {
  // with the drive gain zeroed the spring pair decouples completely:
  // x3'' + 3 x3' + 2 x3 = 0 from (10, -1000), roots -1 and -2
  const auto inst = instantiate("coupled_chatter", {{"forcing_gain", 0.0}});
  const Trajectory traj = simulate(inst.system, inst.init, inst.t_end);

  const double c1 = 2.0 * 10.0 + (-1000.0);  // 2 x3(0) + x4(0)
  const double c2 = 10.0 - c1;
  for (double t : {0.5, 1.0, 2.0, 4.0, 7.5}) {
    const State s = traj.eval(t);
    const double x3 = c1 * std::exp(-t) + c2 * std::exp(-2.0 * t);
    const double x4 = -c1 * std::exp(-t) - 2.0 * c2 * std::exp(-2.0 * t);
    CHECK(s.y[2] == doctest::Approx(x3).epsilon(1e-7));
    CHECK(s.y[3] == doctest::Approx(x4).epsilon(1e-7));
  }
}
