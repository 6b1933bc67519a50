#include "srpr/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace srpr {

namespace {
constexpr std::size_t kBlock = 1024;
}

double blocked_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  std::vector<double> partials;
  partials.reserve((n + kBlock - 1) / kBlock);
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t end = std::min(start + kBlock, n);
    double s = 0.0;
    for (std::size_t i = start; i < end; ++i) s += values[i];
    partials.push_back(s);
  }
  // pairwise over block sums
  while (partials.size() > 1) {
    std::size_t half = (partials.size() + 1) / 2;
    for (std::size_t i = 0; 2 * i + 1 < partials.size(); ++i)
      partials[i] = partials[2 * i] + partials[2 * i + 1];
    if (partials.size() % 2 == 1) partials[half - 1] = partials[partials.size() - 1];
    partials.resize(half);
  }
  return partials[0];
}

double ObjectiveContext::f_ell1(const Vector& x) const {
  Vector ax = instance_.ensemble.apply(x);
  std::vector<double> vals(static_cast<std::size_t>(n()));
  for (std::int64_t i = 0; i < n(); ++i)
    vals[static_cast<std::size_t>(i)] = std::abs(ax[i] * ax[i] - instance_.b[i]);
  return blocked_sum(vals) / static_cast<double>(n());
}

double ObjectiveContext::f_delta(const Vector& x) const {
  Vector ax = instance_.ensemble.apply(x);
  std::vector<double> vals(static_cast<std::size_t>(n()));
  for (std::int64_t i = 0; i < n(); ++i)
    vals[static_cast<std::size_t>(i)] = loss_eval(loss_, ax[i] * ax[i] - instance_.b[i]);
  return blocked_sum(vals) / static_cast<double>(n());
}

Vector ObjectiveContext::grad_f_delta(const Vector& x) const {
  Vector ax = instance_.ensemble.apply(x);
  Vector w(n());
  const double inv_n = 1.0 / static_cast<double>(n());
  for (std::int64_t i = 0; i < n(); ++i)
    w[i] = 2.0 * inv_n * loss_deriv(loss_, ax[i] * ax[i] - instance_.b[i]) * ax[i];
  return instance_.ensemble.apply_adjoint(w);
}

double ObjectiveContext::hess_quadform(const Vector& x, const Vector& w) const {
  Vector ax = instance_.ensemble.apply(x);
  Vector aw = instance_.ensemble.apply(w);
  std::vector<double> vals(static_cast<std::size_t>(n()));
  for (std::int64_t i = 0; i < n(); ++i) {
    double r = ax[i] * ax[i] - instance_.b[i];
    double coef = 2.0 * loss_deriv(loss_, r) + 4.0 * ax[i] * ax[i] * loss_second_deriv(loss_, r);
    vals[static_cast<std::size_t>(i)] = coef * aw[i] * aw[i];
  }
  return blocked_sum(vals) / static_cast<double>(n());
}

Vector ObjectiveContext::hess_vec(const Vector& x, const Vector& v) const {
  Vector ax = instance_.ensemble.apply(x);
  Vector av = instance_.ensemble.apply(v);
  const double inv_n = 1.0 / static_cast<double>(n());
  Vector w(n());
  for (std::int64_t i = 0; i < n(); ++i) {
    double r = ax[i] * ax[i] - instance_.b[i];
    double coef = 2.0 * loss_deriv(loss_, r) + 4.0 * ax[i] * ax[i] * loss_second_deriv(loss_, r);
    w[i] = inv_n * coef * av[i];
  }
  return instance_.ensemble.apply_adjoint(w);
}

LandscapeStats ObjectiveContext::landscape_stats(const Vector& x) const {
  if (!instance_.x_star) throw std::invalid_argument("landscape_stats: instance has no ground truth");
  const Vector& xs = *instance_.x_star;
  Vector g = grad_f_delta(x);
  LandscapeStats s;
  s.u1 = x.dot(g);
  s.u3 = xs.dot(g);
  s.u2 = hess_quadform(x, xs);
  s.grad_norm = g.norm();
  s.f_delta = f_delta(x);
  return s;
}

double relative_error(const Vector& x, const Vector& x_star) {
  double norm = x_star.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("relative_error: x_star must be nonzero");
  double d = std::min((x - x_star).norm(), (x + x_star).norm());
  return d / norm;
}

}  // namespace srpr
