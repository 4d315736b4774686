#include "chatter/theorem.hpp"

#include <cmath>
#include <sstream>

namespace chatter {

namespace {

double grid_coord(double lo, double hi, int k, int n) {
  return (k == n - 1) ? hi : lo + (hi - lo) * k / (n - 1);
}

}  // namespace

BoundsEstimate estimate_bounds(const VectorField& field, const DomainBox& box, int grid_n,
                               const std::vector<double>& times) {
  if (grid_n < 2) throw std::invalid_argument("bounds estimation needs grid_n >= 2 per axis");
  if (times.empty()) throw std::invalid_argument("bounds estimation needs a time slice");

  BoundsEstimate est;
  est.grid_n = grid_n;
  est.time_dependent = field.uses_time;
  est.times = times;
  est.negative_everywhere = true;

  double min_abs_neg = std::numeric_limits<double>::infinity();
  for (double t : times) {
    for (int i = 0; i < grid_n; ++i) {
      const double u = grid_coord(box.lower(), box.upper(), i, grid_n);
      for (int j = 0; j < grid_n; ++j) {
        const double v = grid_coord(-box.speed_bound(), box.speed_bound(), j, grid_n);
        const double f = field(u, v, t);
        if (!std::isfinite(f))
          throw NonFiniteSample("field sample is not finite at (u, v) = (" +
                                std::to_string(u) + ", " + std::to_string(v) + ")");
        const double a = std::abs(f);
        if (a > est.M_est) {
          est.M_est = a;
          est.M_witness = {u, v, t};
        }
        if (f < 0.0 && a < min_abs_neg) {
          min_abs_neg = a;
          est.m_witness = {u, v, t};
        }
        if (f > est.max_f) {
          est.max_f = f;
          est.max_f_witness = {u, v, t};
        }
        if (f >= 0.0) est.negative_everywhere = false;
      }
    }
  }
  if (std::isfinite(min_abs_neg)) est.m_est = min_abs_neg;
  return est;
}

C2Result check_c2(const VectorField& field, const DomainBox& box, int grid_n, double tol,
                  const std::vector<double>& times) {
  if (grid_n < 2) throw std::invalid_argument("evenness check needs grid_n >= 2 per axis");
  C2Result res;
  for (double t : times) {
    for (int i = 0; i < grid_n; ++i) {
      const double u = grid_coord(box.lower(), box.upper(), i, grid_n);
      for (int j = 0; j < grid_n; ++j) {
        const double v = grid_coord(-box.speed_bound(), box.speed_bound(), j, grid_n);
        const double asym = std::abs(field(u, v, t) - field(u, -v, t));
        if (asym > res.max_asymmetry) {
          res.max_asymmetry = asym;
          res.witness = {u, v, t};
        }
      }
    }
  }
  res.holds = res.max_asymmetry <= tol;
  return res;
}

InequalityResult check_inequality(const DomainBox& box, double m, double M) {
  if (!(m > 0.0) || !(M > 0.0))
    throw std::invalid_argument("inequality check needs positive bounds m, M");
  InequalityResult res;
  res.lhs = M * std::sqrt(2.0 * (box.upper() - box.lower()) / m);
  res.margin = box.speed_bound() - res.lhs;
  res.holds = res.lhs < box.speed_bound();
  return res;
}

ChatteringCertificate theorem_verdict(const VectorField& field, const DomainBox& box,
                                      int grid_n, double c2_tol,
                                      const std::vector<double>& times) {
  ChatteringCertificate cert;
  cert.bounds = estimate_bounds(field, box, grid_n, times);
  cert.c2 = check_c2(field, box, grid_n, c2_tol, times);
  cert.c2_tol = c2_tol;
  cert.c1_holds = cert.bounds.negative_everywhere;
  if (cert.c1_holds && cert.bounds.m_est > 0.0)
    cert.inequality = check_inequality(box, cert.bounds.m_est, cert.bounds.M_est);
  cert.overall = cert.c1_holds && cert.c2.holds && cert.inequality.holds;

  std::ostringstream init;
  init << "(x0, 0) with " << box.lower() << " < x0 < " << box.upper();
  cert.initial_set = init.str();
  return cert;
}

}  // namespace chatter
