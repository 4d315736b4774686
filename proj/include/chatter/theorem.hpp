// Numerical certification of the chattering sufficient conditions over a
// domain box: strict negativity of the field, evenness in the velocity,
// and the bound M sqrt(2(h - phi)/m) < hbar. Sampling-based and labeled
// as such: extrema are grid extrema, not rigorous global ones.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "chatter/model.hpp"

namespace chatter {

struct NonFiniteSample : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridPoint {
  double u = 0.0;
  double v = 0.0;
  double t = 0.0;
};

struct BoundsEstimate {
  // Sampled inf |f| over points where f < 0, and sampled sup |f|.
  double m_est = std::numeric_limits<double>::quiet_NaN();
  double M_est = 0.0;
  GridPoint m_witness;  // sample attaining m_est
  GridPoint M_witness;  // sample attaining M_est
  double max_f = -std::numeric_limits<double>::infinity();
  GridPoint max_f_witness;  // violation witness when the field reaches >= 0
  bool negative_everywhere = false;
  int grid_n = 0;
  bool time_dependent = false;
  std::vector<double> times;
};

/// Samples the field on a grid_n x grid_n grid over
/// [lower, upper] x [-speed_bound, speed_bound], at each requested time
/// slice (time-dependent fields default to t = 0 and are flagged).
BoundsEstimate estimate_bounds(const VectorField& field, const DomainBox& box, int grid_n,
                               const std::vector<double>& times = {0.0});

struct C2Result {
  bool holds = false;
  double max_asymmetry = 0.0;
  GridPoint witness;
};

/// Max |f(u, v) - f(u, -v)| over the sample grid; holds iff <= tol.
C2Result check_c2(const VectorField& field, const DomainBox& box, int grid_n,
                  double tol = 1e-12, const std::vector<double>& times = {0.0});

struct InequalityResult {
  double lhs = std::numeric_limits<double>::quiet_NaN();
  bool holds = false;
  double margin = std::numeric_limits<double>::quiet_NaN();  // speed_bound - lhs
};

/// lhs = M sqrt(2 (upper - lower) / m); holds iff lhs < speed_bound.
InequalityResult check_inequality(const DomainBox& box, double m, double M);

struct ChatteringCertificate {
  BoundsEstimate bounds;
  C2Result c2;
  InequalityResult inequality;
  bool c1_holds = false;
  bool overall = false;
  std::string initial_set;  // the certified set of initial conditions
  double c2_tol = 1e-12;
};

/// Composes the three checks. On an overall pass the certificate covers
/// every initial condition (x0, 0) with lower < x0 < upper.
ChatteringCertificate theorem_verdict(const VectorField& field, const DomainBox& box,
                                      int grid_n = 401, double c2_tol = 1e-12,
                                      const std::vector<double>& times = {0.0});

}  // namespace chatter
