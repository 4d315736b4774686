#include "chatter/models.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace chatter {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

class Params {
 public:
  Params(const std::vector<ParamSpec>& specs, const std::map<std::string, double>& overrides,
         const std::string& model) {
    for (const auto& p : specs) values_[p.name] = p.value;
    for (const auto& [key, value] : overrides) {
      auto it = values_.find(key);
      if (it == values_.end()) {
        // x0 / v0 double as aliases for the first-pair coordinates of the
        // four-state and controlled models.
        if (key == "x0" && values_.count("x1_0")) it = values_.find("x1_0");
        else if (key == "v0" && values_.count("x2_0")) it = values_.find("x2_0");
        else
          throw UnknownParameter("model '" + model + "' has no parameter '" + key + "'");
      }
      it->second = value;
      overridden_.insert(it->first);
    }
  }

  double operator[](const std::string& name) const { return values_.at(name); }
  bool overridden(const std::string& name) const { return overridden_.count(name) > 0; }

 private:
  std::map<std::string, double> values_;
  std::set<std::string> overridden_;
};

ModelInstance build_example1(const Params& p) {
  ModelInstance inst;
  inst.name = "example1";
  VectorField f;
  f.accel = [](double x, double v, double) { return -std::cos(v) - x * x * x; };
  inst.system = HybridSystem{f, Guard::fixed(p["phi"]), ImpactLaw(p["r"]),
                             DomainBox(p["phi"], p["h"], p["hbar"]), std::nullopt};
  inst.init = State(p["t0"], {p["x0"], p["v0"]});
  inst.t_end = p["t_end"];
  inst.field_expression = "-cos(v) - x^3";
  return inst;
}

ModelInstance build_bouncing_ball(const Params& p) {
  ModelInstance inst;
  inst.name = "bouncing_ball";
  const double g = p["g"];
  VectorField f;
  f.accel = [g](double, double, double) { return -g; };
  inst.system = HybridSystem{f, Guard::fixed(p["phi"]), ImpactLaw(p["r"]), std::nullopt,
                             std::nullopt};
  inst.init = State(p["t0"], {p["x0"], p["v0"]});
  inst.t_end = p["t_end"];
  inst.field_expression = "-" + num(g);
  return inst;
}

ModelInstance build_vibrating_table(const Params& p) {
  ModelInstance inst;
  inst.name = "vibrating_table";
  const double g = p["g"];
  const double omega = p["omega"];
  VectorField f;
  f.accel = [g](double, double, double) { return -g; };
  // The published run starts one full table period in; an overridden t0
  // wins, otherwise it follows the (possibly overridden) frequency.
  const double t0 = p.overridden("t0") ? p["t0"] : kTwoPi / omega;
  inst.system = HybridSystem{f, Guard::sinusoidal(p["X0"], omega), ImpactLaw(p["r"]),
                             DomainBox(p["X0"] / 10.0, p["h"], p["hbar"]), std::nullopt};
  inst.init = State(t0, {p["x0"], p["v0"]});
  inst.t_end = p["t_end"];
  inst.field_expression = "-" + num(g);
  return inst;
}

ModelInstance build_moon_holmes(const Params& p) {
  ModelInstance inst;
  inst.name = "moon_holmes";
  const double delta = p["delta"], gamma = p["gamma"], w = p["w"];
  VectorField f;
  f.uses_time = true;
  f.accel = [delta, gamma, w](double x, double v, double t) {
    return -delta * v + x - x * x * x + gamma * std::cos(w * t);
  };
  inst.system = HybridSystem{f, Guard::fixed(p["phi"]), ImpactLaw(p["r"]),
                             DomainBox(p["phi"], p["h"], p["hbar"]), std::nullopt};
  inst.init = State(p["t0"], {p["x0"], p["v0"]});
  inst.t_end = p["t_end"];
  inst.field_expression = "-" + num(delta) + "*v + x - x^3 + " + num(gamma) + "*cos(" +
                          num(w) + "*t)";
  return inst;
}

ModelInstance build_moon_holmes_autonomous(const Params& p) {
  ModelInstance inst;
  inst.name = "moon_holmes_autonomous";
  VectorField f;
  f.accel = [](double x, double, double) { return x - x * x * x; };
  inst.system = HybridSystem{f, Guard::fixed(p["phi"]), ImpactLaw(p["r"]),
                             DomainBox(p["phi"], p["h"], p["hbar"]), std::nullopt};
  inst.init = State(p["t0"], {p["x0"], p["v0"]});
  inst.t_end = p["t_end"];
  inst.field_expression = "x - x^3";
  return inst;
}

ModelInstance build_coupled_chatter(const Params& p) {
  ModelInstance inst;
  inst.name = "coupled_chatter";
  const double g = p["g"];
  VectorField f;
  f.accel = [g](double, double, double) { return -g; };
  CoupledSpring spring;
  spring.mass = p["mass"];
  spring.damping = p["damping"];
  spring.stiffness = p["stiffness"];
  const double fg = p["forcing_gain"];
  spring.forcing = [fg](double, double x2) { return fg * x2 * x2; };
  inst.system = HybridSystem{f, Guard::fixed(p["phi"]), ImpactLaw(p["r"]), std::nullopt,
                             spring};
  inst.init = State(p["t0"], {p["x1_0"], p["x2_0"], p["x3_0"], p["x4_0"]});
  inst.t_end = p["t_end"];
  inst.field_expression = "-" + num(g);
  return inst;
}

ModelInstance build_pyragas_example1(const Params& p) {
  ModelInstance inst;
  inst.name = "pyragas_example1";
  VectorField f;
  f.accel = [](double x, double v, double) { return -std::cos(v) - x * x * x; };
  inst.system = HybridSystem{f, Guard::fixed(p["phi"]), ImpactLaw(p["r"]),
                             DomainBox(p["phi"], p["h"], p["hbar"]), std::nullopt};
  inst.init = State(p["t0"], {p["x1_0"], p["x2_0"]});
  inst.t_end = p["t_end"];
  inst.control = ControlParams{p["C"], p["tau"]};
  inst.field_expression = "-cos(v) - x^3";
  return inst;
}

std::vector<ModelSpec> make_catalog() {
  std::vector<ModelSpec> cat;

  cat.push_back({"example1",
                 "nonlinear oscillator x'' + cos(x') + x^3 = 0 against a wall at x = 2",
                 {{"phi", 2.0, "m", "wall position"},
                  {"r", 0.8, "-", "restitution coefficient"},
                  {"x0", 2.1, "m", "initial position"},
                  {"v0", 0.0, "m/s", "initial velocity"},
                  {"t0", 0.0, "s", "initial time"},
                  {"h", 2.5, "m", "domain upper position bound"},
                  {"hbar", 7.0, "m/s", "domain speed bound"},
                  {"t_end", 2.0, "s", "simulation horizon"}}});

  cat.push_back({"bouncing_ball",
                 "free fall onto a fixed floor; the closed-form accumulation benchmark",
                 {{"g", 9.8, "m/s^2", "gravitational acceleration"},
                  {"phi", 0.0, "m", "floor position"},
                  {"r", 0.5, "-", "restitution coefficient"},
                  {"x0", 2.0, "m", "initial height"},
                  {"v0", 0.0, "m/s", "initial velocity"},
                  {"t0", 0.0, "s", "initial time"},
                  {"t_end", 3.0, "s", "simulation horizon"}}});

  cat.push_back({"vibrating_table",
                 "bead in free fall on a table moving as X0 sin(omega t)",
                 {{"g", 9.8, "m/s^2", "gravitational acceleration"},
                  {"X0", 1.0, "m", "table amplitude"},
                  {"omega", 0.29, "1/s", "table frequency"},
                  {"r", 0.9, "-", "restitution coefficient"},
                  {"x0", 1.9, "m", "initial position"},
                  {"v0", 0.0, "m/s", "initial velocity"},
                  {"t0", 0.0, "s", "initial time (defaults to one table period)"},
                  {"h", 2.0, "m", "domain upper position bound"},
                  {"hbar", 7.0, "m/s", "domain speed bound"},
                  {"t_end", 60.0, "s", "simulation horizon"}}});

  cat.push_back({"moon_holmes",
                 "forced, damped magneto-elastic beam with an obstacle at x = 1.1",
                 {{"delta", 0.02, "-", "damping coefficient"},
                  {"gamma", 0.02, "-", "forcing amplitude"},
                  {"w", 0.1, "1/s", "forcing frequency"},
                  {"phi", 1.1, "m", "obstacle position"},
                  {"r", 0.9, "-", "restitution coefficient"},
                  {"x0", 1.3, "m", "initial position"},
                  {"v0", 0.0, "m/s", "initial velocity"},
                  {"t0", 0.0, "s", "initial time"},
                  {"h", 1.5, "m", "domain upper position bound"},
                  {"hbar", 3.0, "m/s", "domain speed bound"},
                  {"t_end", 25.0, "s", "simulation horizon"}}});

  cat.push_back({"moon_holmes_autonomous",
                 "undamped, unforced beam x'' = x - x^3 with the obstacle at x = 1.1",
                 {{"phi", 1.1, "m", "obstacle position"},
                  {"r", 0.9, "-", "restitution coefficient"},
                  {"x0", 1.3, "m", "initial position"},
                  {"v0", 0.0, "m/s", "initial velocity"},
                  {"t0", 0.0, "s", "initial time"},
                  {"h", 1.5, "m", "domain upper position bound"},
                  {"hbar", 3.0, "m/s", "domain speed bound"},
                  {"t_end", 25.0, "s", "simulation horizon"}}});

  cat.push_back({"coupled_chatter",
                 "bouncing pair driving a mass-spring-damper through 20 x2^2",
                 {{"g", 9.8, "m/s^2", "gravitational acceleration"},
                  {"phi", 1.0, "m", "floor position"},
                  {"r", 0.9, "-", "restitution coefficient"},
                  {"x1_0", 6.0, "m", "initial position of the bouncing pair"},
                  {"x2_0", 0.0, "m/s", "initial velocity of the bouncing pair"},
                  {"x3_0", 10.0, "m", "initial spring position"},
                  {"x4_0", -1000.0, "m/s", "initial spring velocity"},
                  {"mass", 1.0, "kg", "spring mass"},
                  {"damping", 3.0, "kg/s", "spring damping"},
                  {"stiffness", 2.0, "kg/s^2", "spring stiffness"},
                  {"forcing_gain", 20.0, "kg/m", "gain on x2^2 driving the spring"},
                  {"t0", 0.0, "s", "initial time"},
                  {"t_end", 8.0, "s", "simulation horizon"}}});

  cat.push_back({"pyragas_example1",
                 "example1 dynamics under delay feedback C [x1(t - tau) - x1(t)]",
                 {{"phi", 2.0, "m", "wall position"},
                  {"r", 0.6, "-", "restitution coefficient"},
                  {"x1_0", 3.0, "m", "initial position"},
                  {"x2_0", 0.0, "m/s", "initial velocity"},
                  {"C", -30.0, "1/s^2", "feedback gain"},
                  {"tau", 1.0, "s", "feedback delay"},
                  {"t0", 0.0, "s", "initial time"},
                  {"h", 2.5, "m", "domain upper position bound"},
                  {"hbar", 7.0, "m/s", "domain speed bound"},
                  {"t_end", 80.0, "s", "simulation horizon"}}});

  return cat;
}

}  // namespace

const std::vector<ModelSpec>& catalog() {
  static const std::vector<ModelSpec> cat = make_catalog();
  return cat;
}

ModelInstance instantiate(const std::string& name,
                          const std::map<std::string, double>& overrides) {
  const ModelSpec* spec = nullptr;
  for (const auto& s : catalog())
    if (s.name == name) spec = &s;
  if (!spec) throw UnknownModel("unknown model '" + name + "'");

  Params p(spec->params, overrides, name);
  if (name == "example1") return build_example1(p);
  if (name == "bouncing_ball") return build_bouncing_ball(p);
  if (name == "vibrating_table") return build_vibrating_table(p);
  if (name == "moon_holmes") return build_moon_holmes(p);
  if (name == "moon_holmes_autonomous") return build_moon_holmes_autonomous(p);
  if (name == "coupled_chatter") return build_coupled_chatter(p);
  return build_pyragas_example1(p);
}

}  // namespace chatter
