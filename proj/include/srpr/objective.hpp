#pragma once

#include <span>

#include "srpr/kernels.hpp"
#include "srpr/measurement.hpp"

namespace srpr {

// Fixed-size blocked pairwise summation (block 1024); the reduction order is
// independent of any parallel partitioning of the per-measurement loop.
double blocked_sum(std::span<const double> values);

struct LandscapeStats {
  double u1 = 0.0;        // <x, grad F_delta(x)>
  double u2 = 0.0;        // x_star^T Hess F_delta(x) x_star
  double u3 = 0.0;        // <x_star, grad F_delta(x)>
  double grad_norm = 0.0;
  double f_delta = 0.0;
};

// Immutable view over an instance plus a smoothed loss; all evaluations at
// the same x are bitwise reproducible.
class ObjectiveContext {
 public:
  ObjectiveContext(const Instance& instance, SmoothedLoss loss)
      : instance_(instance), loss_(loss) {}

  const Instance& instance() const { return instance_; }
  const SmoothedLoss& loss() const { return loss_; }
  std::int64_t n() const { return instance_.n(); }
  std::int64_t p() const { return instance_.p(); }

  // F(x) = (1/n) sum |(a_i^T x)^2 - b_i|
  double f_ell1(const Vector& x) const;

  // F_delta(x) = (1/n) sum l_delta((a_i^T x)^2 - b_i)
  double f_delta(const Vector& x) const;

  // (1/n) sum 2 l'_delta(r_i) (a_i^T x) a_i, one apply + one apply_adjoint
  Vector grad_f_delta(const Vector& x) const;

  // w^T Hess F_delta(x) w without forming the Hessian
  double hess_quadform(const Vector& x, const Vector& w) const;

  // Hess F_delta(x) v, matrix-free
  Vector hess_vec(const Vector& x, const Vector& v) const;

  // empirical means of U1, U2, U3 plus F_delta and the gradient norm;
  // requires ground truth on the instance
  LandscapeStats landscape_stats(const Vector& x) const;

 private:
  const Instance& instance_;
  SmoothedLoss loss_;
};

// dist(x, {x_star, -x_star}) / ||x_star||
double relative_error(const Vector& x, const Vector& x_star);

}  // namespace srpr
