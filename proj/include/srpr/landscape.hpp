#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "srpr/objective.hpp"

namespace srpr {

// Gauss-Hermite nodes/weights for the weight e^{-x^2} (physicists'
// convention); E[f(Z)] with Z ~ N(0,1) is (1/sqrt(pi)) sum w_i f(sqrt(2) x_i).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermite gauss_hermite(int n);

// Population expectations over (g1, g2) ~ N(0, I_2) with x = c*x_star + s*perp,
// ||x_star|| = 1. Values carry an error estimate (difference between two
// quadrature tolerance levels); estimates above 1e-6 are refused.
class PopulationProbe {
 public:
  explicit PopulationProbe(SmoothedLoss loss, int nodes_per_axis = 128);

  const SmoothedLoss& loss() const { return loss_; }

  // E[ 2 (c g1 + s g2)^2 l'_delta((c g1 + s g2)^2 - g1^2) ]
  double u1(double c, double s) const;
  // E[ 2 l' g1^2 + 4 (c g1 + s g2)^2 l'' g1^2 ]
  double u2(double c, double s) const;
  // E[ 2 g1 l' (c g1 + s g2) ]
  double u3(double c, double s) const;

  // Monte Carlo cross-checks of the quadrature path
  double u1_mc(double c, double s, std::int64_t samples, std::uint64_t seed) const;
  double u2_mc(double c, double s, std::int64_t samples, std::uint64_t seed) const;

  // solves E[l'_delta(u^2 g2^2 - g1^2) g2^2] = 0 for u > 0 by bisection;
  // the bracket is widened geometrically if needed
  double solve_u_delta(double lo = 0.05, double hi = 2.0) const;

  // the stationary-ring equation's left side at a given u
  double ring_equation(double u) const;

 private:
  template <typename F>
  double expect2d(F&& f, double c, double s, double tol) const;
  template <typename F>
  double checked(F&& f, double c, double s) const;

  SmoothedLoss loss_;
  int nodes_;  // retained for validation; refinement is adaptive
};

// unique root of pi/4 = arctan(u) + u/(u^2+1)
double u0_limit();

// closed form of lim_{delta->0} E[U2] on the orthogonal circle of radius u
double limiting_u2(double u);

struct LandscapeGrid {
  std::vector<double> u_axis;
  std::vector<double> v_axis;
  // row-major over (u, v)
  std::vector<double> f_delta, grad_norm, u1, u2, u3;
};

// Evaluates the empirical objective/gradient/U-statistics on the plane
// spanned by x_star and a fixed recorded orthogonal direction.
LandscapeGrid empirical_scan(const Instance& instance, const SmoothedLoss& loss,
                             const std::vector<double>& u_axis,
                             const std::vector<double>& v_axis);

void write_grid_csv(const LandscapeGrid& grid, const std::string& path);

// Whether h_n(u) = E_n[U1(u x0)] / u^2 is nondecreasing over the grid.
bool monotone_u1_check(const Instance& instance, const SmoothedLoss& loss,
                       const Vector& x0, const std::vector<double>& u_grid,
                       double tolerance = 1e-12);

struct VicinityFit {
  double spearman_delta = 0.0;  // rel_error vs delta at fixed p_fail, averaged
  double spearman_pfail = 0.0;  // rel_error vs p_fail at fixed delta, averaged
  double slope = 0.0;           // LS fit of rel_error on delta*p_fail/(1-p_fail)
  double intercept = 0.0;
};

struct VicinityPoint {
  double delta = 0.0;
  double p_fail = 0.0;
  double rel_error = 0.0;
};

VicinityFit vicinity_radius_fit(const std::vector<VicinityPoint>& table);

}  // namespace srpr
