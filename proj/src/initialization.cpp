#include "srpr/initialization.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace srpr {

Vector random_init(const RandomSphereSpec& spec, std::int64_t p, std::uint64_t seed) {
  if (p < 2) throw std::invalid_argument("random_init: p must be >= 2");
  Rng rng(seed, Stream::Init);
  Vector x(p);
  for (std::int64_t i = 0; i < p; ++i) x[i] = rng.normal();
  x /= x.norm();
  double r = spec.law == RadiusLaw::UniformScaled ? rng.uniform(0.0, spec.radius) : spec.radius;
  return r * x;
}

double chi2_1_median() {
  // chi^2_1 CDF is erf(sqrt(x/2)); bisect erf(sqrt(m/2)) = 1/2
  double lo = 0.1, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (std::erf(std::sqrt(0.5 * mid)) < 0.5)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Vector spectral_init(const Instance& instance, const SpectralSpec& spec) {
  if (!(spec.quantile > 0.0 && spec.quantile < 1.0))
    throw std::invalid_argument("spectral_init: quantile must be in (0,1)");
  const std::int64_t n = instance.n();
  const std::int64_t p = instance.p();
  if (n < 2 * p)
    std::cerr << "spectral_init: warning, n < 2p; initialization may be unreliable\n";

  // selection set: the ceil(q*n) rows with smallest b (ties by index)
  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t a, std::int64_t c) { return instance.b[a] < instance.b[c]; });
  auto m = static_cast<std::int64_t>(
      std::ceil(spec.quantile * static_cast<double>(n)));
  if (m < p) {
    std::cerr << "spectral_init: warning, selection set smaller than p; widening\n";
    m = std::min(n, p);
  }

  Vector mask = Vector::Zero(n);
  for (std::int64_t i = 0; i < m; ++i) mask[order[i]] = 1.0;

  // M = (1/m) sum_{selected} a_i a_i^T, applied matrix-free:
  // M v = (1/m) A^T (mask .* (A v))
  const double inv_m = 1.0 / static_cast<double>(m);
  auto apply_m = [&](const Vector& v) {
    Vector av = instance.ensemble.apply(v);
    av.array() *= mask.array();
    return Vector(inv_m * instance.ensemble.apply_adjoint(av));
  };

  // shifted power iteration on c*I - M finds the smallest eigenvector of M.
  // The shift must sit just above lambda_max: shifting by trace(M) would make
  // the spectral gap of c*I - M vanish relative to c. Estimate lambda_max
  // with a plain power iteration first.
  Rng rng(instance.seed, Stream::Init);
  Vector v(p);
  for (std::int64_t i = 0; i < p; ++i) v[i] = rng.normal();
  v /= v.norm();
  double lam_max = 0.0;
  for (int it = 0; it < 100; ++it) {
    Vector w = apply_m(v);
    double nw = w.norm();
    if (nw == 0.0) break;
    w /= nw;
    if (it > 0 && std::abs(nw - lam_max) <= 1e-9 * std::max(1.0, lam_max)) {
      lam_max = nw;
      v = w;
      break;
    }
    lam_max = nw;
    v = w;
  }
  const double shift = 1.01 * lam_max + 1e-12;

  for (std::int64_t i = 0; i < p; ++i) v[i] = rng.normal();
  v /= v.norm();
  double rayleigh = 0.0;
  for (int it = 0; it < spec.power_iters; ++it) {
    Vector w = shift * v - apply_m(v);
    double new_rayleigh = v.dot(w);
    w /= w.norm();
    v = w;
    if (it > 0 && std::abs(new_rayleigh - rayleigh) <= 1e-12 * std::max(1.0, std::abs(rayleigh))) {
      rayleigh = new_rayleigh;
      break;
    }
    rayleigh = new_rayleigh;
  }

  // robust scale: median(b) approximates ||x_star||^2 * median(chi^2_1)
  std::vector<double> bs(instance.b.data(), instance.b.data() + n);
  std::nth_element(bs.begin(), bs.begin() + n / 2, bs.end());
  double med = bs[static_cast<std::size_t>(n / 2)];
  if (n % 2 == 0) {
    double lo = *std::max_element(bs.begin(), bs.begin() + n / 2);
    med = 0.5 * (med + lo);
  }
  // per-direction row variance proxy: mean ||a_i||^2 / p (=1 for standard
  // Gaussian rows, 1/n for the Hadamard ensemble)
  double mean_sq = 0.0;
  for (std::int64_t i = 0; i < n; ++i) mean_sq += instance.ensemble.row_squared_norm(i);
  mean_sq /= static_cast<double>(n);
  double row_var = mean_sq / static_cast<double>(p);
  double scale = std::sqrt(std::max(med, 0.0) / (chi2_1_median() * row_var));
  return scale * v;
}

}  // namespace srpr
