// Core domain types for impact oscillators with Newtonian restitution:
// vector field, guard surface, impact law, domain box, and the assembled
// hybrid system. All types are immutable after construction and safe to
// share across threads; evaluation is pure.
#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chatter {

/// Relative approach speeds below this are treated as grazing contact and
/// routed to sticking logic instead of the restitution map.
inline constexpr double kGrazingSpeed = 1e-9;

/// |guard gap| accepted as "on the surface" by event handling.
inline constexpr double kPositionTol = 1e-9;

struct GrazingImpact : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidApproach : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Acceleration field f(x, v, t) of the impacting coordinate pair.
/// Autonomous systems ignore t; `uses_time` flags forced/delayed fields so
/// downstream checks know a reference time matters.
struct VectorField {
  std::function<double(double x, double v, double t)> accel;
  bool uses_time = false;

  double operator()(double x, double v, double t) const { return accel(x, v, t); }
};

/// Impact surface: either a fixed wall x = phi or a sinusoidally vibrating
/// table x = X0 sin(omega t). The guard value g(x, t) = x - position(t) is
/// positive above the surface and negative on penetration.
class Guard {
 public:
  static Guard fixed(double phi) { return Guard(Kind::fixed_wall, phi, 0.0); }

  static Guard sinusoidal(double amplitude, double omega) {
    if (omega <= 0.0) throw std::invalid_argument("guard: omega must be positive");
    return Guard(Kind::vibrating_table, amplitude, omega);
  }

  bool is_fixed() const { return kind_ == Kind::fixed_wall; }

  double position(double t) const {
    return is_fixed() ? a_ : a_ * std::sin(b_ * t);
  }

  double velocity(double t) const {
    return is_fixed() ? 0.0 : a_ * b_ * std::cos(b_ * t);
  }

  double acceleration(double t) const {
    return is_fixed() ? 0.0 : -a_ * b_ * b_ * std::sin(b_ * t);
  }

  double value(double x, double t) const { return x - position(t); }

  /// Fixed wall height; only meaningful for fixed guards.
  double phi() const { return a_; }
  double amplitude() const { return a_; }
  double omega() const { return b_; }

  bool same_surface(const Guard& other) const {
    return kind_ == other.kind_ && a_ == other.a_ && b_ == other.b_;
  }

 private:
  enum class Kind { fixed_wall, vibrating_table };

  Guard(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  Kind kind_;
  double a_;  // phi or X0
  double b_;  // 0 or omega
};

inline double guard_value(const Guard& guard, double x, double t) {
  return guard.value(x, t);
}

/// Newtonian restitution with coefficient strictly inside (0, 1).
class ImpactLaw {
 public:
  explicit ImpactLaw(double restitution) : r_(restitution) {
    if (!(restitution > 0.0) || !(restitution < 1.0))
      throw std::invalid_argument("restitution coefficient must satisfy 0 < r < 1");
  }

  double restitution() const { return r_; }

 private:
  double r_;
};

/// Velocity reset at contact. `v_pre` and `surface_velocity` are absolute;
/// the relative approach velocity v_pre - surface_velocity must be negative.
/// Returns surface_velocity - r * (v_pre - surface_velocity).
inline double apply_impact(const ImpactLaw& law, double v_pre, double surface_velocity,
                           double grazing_speed = kGrazingSpeed) {
  const double rel = v_pre - surface_velocity;
  if (std::abs(rel) < grazing_speed)
    throw GrazingImpact("grazing contact: relative approach speed below threshold");
  if (rel >= 0.0)
    throw InvalidApproach("impact requires the body to move into the surface");
  return surface_velocity - law.restitution() * rel;
}

/// Post/pre kinetic energy ratio of a fixed-wall impact.
inline double kinetic_energy_ratio(const ImpactLaw& law) {
  return law.restitution() * law.restitution();
}

/// Closed sampling region [lower, upper] x [-speed_bound, speed_bound] for
/// the hypothesis checks. Lower bound must be strictly positive.
class DomainBox {
 public:
  DomainBox(double lower, double upper, double speed_bound)
      : lower_(lower), upper_(upper), speed_bound_(speed_bound) {
    if (!(0.0 < lower && lower < upper))
      throw std::invalid_argument("domain box requires 0 < lower < upper");
    if (!(speed_bound > 0.0))
      throw std::invalid_argument("domain box requires a positive speed bound");
  }

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double speed_bound() const { return speed_bound_; }

 private:
  double lower_;
  double upper_;
  double speed_bound_;
};

/// Linear mass-spring-damper pair (x3, x4) driven unilaterally by the
/// impacting pair:  m x3'' + c x3' + k x3 = forcing(x1, x2).
struct CoupledSpring {
  double mass = 1.0;
  double damping = 3.0;
  double stiffness = 2.0;
  std::function<double(double x1, double x2)> forcing;
};

struct State {
  double t = 0.0;
  std::vector<double> y;

  State() = default;
  State(double time, std::vector<double> coords) : t(time), y(std::move(coords)) {}

  double position() const { return y[0]; }
  double velocity() const { return y[1]; }
  int dimension() const { return static_cast<int>(y.size()); }
};

/// Complete model: flight field, guard, restitution, optional check box and
/// optional unilaterally coupled spring pair. Dimension is 2, or 4 when the
/// spring is present (the guard always acts on the (x1, x2) pair).
struct HybridSystem {
  VectorField field;
  Guard guard;
  ImpactLaw impact;
  std::optional<DomainBox> domain;
  std::optional<CoupledSpring> spring;

  int dimension() const { return spring ? 4 : 2; }
};

}  // namespace chatter
