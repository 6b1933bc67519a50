#include "srpr/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace srpr {

GaussHermite gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  // Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
  // orthonormal Hermite recurrence (diagonal 0, off-diagonal sqrt(j/2)).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 1));
  for (int j = 1; j < n; ++j) sub[j - 1] = std::sqrt(0.5 * j);
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.computeFromTridiagonal(diag, sub.head(std::max(n - 1, 0)),
                            Eigen::EigenvaluesOnly);
  GaussHermite gh;
  gh.nodes.resize(n);
  gh.weights.resize(n);
  for (int i = 0; i < n; ++i) gh.nodes[i] = es.eigenvalues()[i];
  std::sort(gh.nodes.begin(), gh.nodes.end());
  // symmetrize against the exact node symmetry x_i = -x_{n-1-i}
  for (int i = 0; i < n / 2; ++i) {
    double m = 0.5 * (gh.nodes[n - 1 - i] - gh.nodes[i]);
    gh.nodes[i] = -m;
    gh.nodes[n - 1 - i] = m;
  }
  if (n % 2 == 1) gh.nodes[n / 2] = 0.0;
  // Christoffel weights, 1/sum_k p_k(x)^2, evaluated through the bounded
  // Hermite functions q_k = p_k exp(-x^2/2) to avoid overflow at large n
  for (int i = 0; i <= (n - 1) / 2; ++i) {
    const double x = gh.nodes[i];
    // q_k = r_k * exp(L); rescale when r grows so the tiny e^{-x^2/2} start
    // never underflows before the oscillatory regime is reached
    double L = -0.5 * x * x;
    double r0 = std::pow(M_PI, -0.25);
    double rm1 = 0.0;
    double sum = r0 * r0;
    for (int k = 1; k < n; ++k) {
      double bk = std::sqrt(0.5 * k);
      double bkm1 = std::sqrt(0.5 * (k - 1));
      double r1 = (x * r0 - bkm1 * rm1) / bk;
      sum += r1 * r1;
      rm1 = r0;
      r0 = r1;
      if (std::abs(r0) > 1e140) {
        r0 *= 1e-140;
        rm1 *= 1e-140;
        sum *= 1e-280;
        L += 140.0 * std::log(10.0);
      }
    }
    double w = std::exp(-x * x - 2.0 * L) / sum;
    gh.weights[i] = w;
    gh.weights[n - 1 - i] = w;
  }
  return gh;
}

PopulationProbe::PopulationProbe(SmoothedLoss loss, int nodes_per_axis)
    : loss_(loss), nodes_(nodes_per_axis) {
  if (nodes_ < 32) throw std::invalid_argument("PopulationProbe: need >= 32 nodes per axis");
}

namespace {

template <typename G>
double adsimp(G&& g, double a, double m, double b, double fa, double fm,
              double fb, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = g(lm), frm = g(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double s2 = left + right;
  if (depth <= 0 || std::abs(s2 - whole) <= 15.0 * tol)
    return s2 + (s2 - whole) / 15.0;
  return adsimp(g, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adsimp(g, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename G>
double integrate_segment(G&& g, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = g(a), fm = g(m), fb = g(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adsimp(g, a, m, b, fa, fm, fb, whole, tol, 46);
}

}  // namespace

// Tensor quadrature on fixed Gaussian grids cannot resolve the kink manifold
// of l_delta at small delta, so both axes are integrated adaptively. The
// inner g1 interval is split where the residual
// r(g1) = (c g1 + s g2)^2 - g1^2 crosses -delta, 0, delta (a quadratic in
// g1, so the split points are explicit); the outer g2 integral sees only the
// smoothed-out inner values and plain adaptive refinement suffices.
template <typename F>
double PopulationProbe::expect2d(F&& f, double c, double s, double tol) const {
  const double limit = 9.0;
  const double delta = loss_.delta;
  const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * M_PI);
  auto inner_expect = [&](double g2) {
    double splits[6];
    int nsplit = 0;
    const double qa = c * c - 1.0, qb = 2.0 * c * s * g2, qc0 = s * s * g2 * g2;
    for (double t : {-delta, 0.0, delta}) {
      double qc = qc0 - t;
      if (std::abs(qa) < 1e-14) {
        if (std::abs(qb) > 1e-14) {
          double r = -qc / qb;
          if (r > -limit && r < limit) splits[nsplit++] = r;
        }
      } else {
        double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
          double sq = std::sqrt(disc);
          for (double r : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)})
            if (r > -limit && r < limit) splits[nsplit++] = r;
        }
      }
    }
    std::sort(splits, splits + nsplit);
    auto integrand = [&](double g1) {
      return f(g1, g2) * inv_sqrt2pi * std::exp(-0.5 * g1 * g1);
    };
    double inner = 0.0, a = -limit;
    for (int t = 0; t <= nsplit; ++t) {
      double b = t == nsplit ? limit : splits[t];
      inner += integrate_segment(integrand, a, b, 0.01 * tol);
      a = b;
    }
    return inner;
  };
  auto outer = [&](double g2) {
    return inner_expect(g2) * inv_sqrt2pi * std::exp(-0.5 * g2 * g2);
  };
  // split at g2 = 0, where the inner kink geometry changes branch
  return integrate_segment(outer, -limit, 0.0, 0.5 * tol) +
         integrate_segment(outer, 0.0, limit, 0.5 * tol);
}

template <typename F>
double PopulationProbe::checked(F&& f, double c, double s) const {
  double coarse = expect2d(f, c, s, 1e-7);
  double fine = expect2d(f, c, s, 1e-9);
  if (std::abs(fine - coarse) > 1e-6)
    throw std::runtime_error("PopulationProbe: quadrature error estimate above 1e-6");
  return fine;
}

double PopulationProbe::u1(double c, double s) const {
  return checked([&](double g1, double g2) {
    double ax = c * g1 + s * g2;
    return 2.0 * ax * ax * loss_deriv(loss_, ax * ax - g1 * g1);
  }, c, s);
}

double PopulationProbe::u2(double c, double s) const {
  return checked([&](double g1, double g2) {
    double ax = c * g1 + s * g2;
    double r = ax * ax - g1 * g1;
    return 2.0 * loss_deriv(loss_, r) * g1 * g1 +
           4.0 * ax * ax * loss_second_deriv(loss_, r) * g1 * g1;
  }, c, s);
}

double PopulationProbe::u3(double c, double s) const {
  return checked([&](double g1, double g2) {
    double ax = c * g1 + s * g2;
    return 2.0 * g1 * loss_deriv(loss_, ax * ax - g1 * g1) * ax;
  }, c, s);
}

double PopulationProbe::u1_mc(double c, double s, std::int64_t samples,
                              std::uint64_t seed) const {
  Rng rng(seed);
  double sum = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    double g1 = rng.normal(), g2 = rng.normal();
    double ax = c * g1 + s * g2;
    sum += 2.0 * ax * ax * loss_deriv(loss_, ax * ax - g1 * g1);
  }
  return sum / static_cast<double>(samples);
}

double PopulationProbe::u2_mc(double c, double s, std::int64_t samples,
                              std::uint64_t seed) const {
  Rng rng(seed);
  double sum = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    double g1 = rng.normal(), g2 = rng.normal();
    double ax = c * g1 + s * g2;
    double r = ax * ax - g1 * g1;
    sum += 2.0 * loss_deriv(loss_, r) * g1 * g1 +
           4.0 * ax * ax * loss_second_deriv(loss_, r) * g1 * g1;
  }
  return sum / static_cast<double>(samples);
}

double PopulationProbe::ring_equation(double u) const {
  return checked([&](double g1, double g2) {
    return loss_deriv(loss_, u * u * g2 * g2 - g1 * g1) * g2 * g2;
  }, 0.0, u);
}

double PopulationProbe::solve_u_delta(double lo, double hi) const {
  double flo = ring_equation(lo);
  double fhi = ring_equation(hi);
  for (int widen = 0; widen < 20 && !(flo < 0.0 && fhi > 0.0); ++widen) {
    lo *= 0.5;
    hi *= 2.0;
    flo = ring_equation(lo);
    fhi = ring_equation(hi);
  }
  if (!(flo < 0.0 && fhi > 0.0))
    throw std::runtime_error("solve_u_delta: bracket has no sign change");
  while (hi - lo > 1e-9) {
    double mid = 0.5 * (lo + hi);
    if (ring_equation(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double u0_limit() {
  auto h = [](double u) { return std::atan(u) + u / (u * u + 1.0) - M_PI_4; };
  double lo = 0.1, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    double mid = 0.5 * (lo + hi);
    if (h(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double limiting_u2(double u) {
  if (!(u > 0.0)) throw std::invalid_argument("limiting_u2: u must be positive");
  double u2 = u * u;
  return 16.0 * u * u2 / (M_PI * (1.0 + u2) * (1.0 + u2)) +
         8.0 / M_PI * (std::atan(u) - M_PI_4 - u / (u2 + 1.0));
}

LandscapeGrid empirical_scan(const Instance& instance, const SmoothedLoss& loss,
                             const std::vector<double>& u_axis,
                             const std::vector<double>& v_axis) {
  if (!instance.x_star) throw std::invalid_argument("empirical_scan: ground truth required");
  const Vector& xs = *instance.x_star;
  const std::int64_t p = instance.p();

  // fixed orthogonal direction: the coordinate axis least aligned with x_star,
  // Gram-Schmidt against x_star
  Vector xhat = xs / xs.norm();
  std::int64_t jmin = 0;
  for (std::int64_t j = 1; j < p; ++j)
    if (std::abs(xhat[j]) < std::abs(xhat[jmin])) jmin = j;
  Vector perp = Vector::Zero(p);
  perp[jmin] = 1.0;
  perp -= perp.dot(xhat) * xhat;
  perp /= perp.norm();

  ObjectiveContext ctx(instance, loss);
  LandscapeGrid grid;
  grid.u_axis = u_axis;
  grid.v_axis = v_axis;
  const std::size_t cells = u_axis.size() * v_axis.size();
  grid.f_delta.resize(cells);
  grid.grad_norm.resize(cells);
  grid.u1.resize(cells);
  grid.u2.resize(cells);
  grid.u3.resize(cells);
  std::size_t idx = 0;
  for (double u : u_axis) {
    for (double v : v_axis) {
      Vector x = u * xs + v * perp;
      LandscapeStats s = ctx.landscape_stats(x);
      grid.f_delta[idx] = s.f_delta;
      grid.grad_norm[idx] = s.grad_norm;
      grid.u1[idx] = s.u1;
      grid.u2[idx] = s.u2;
      grid.u3[idx] = s.u3;
      ++idx;
    }
  }
  return grid;
}

void write_grid_csv(const LandscapeGrid& grid, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_grid_csv: cannot open " + path);
  os << "u,v,f_delta,grad_norm,u1,u2,u3\n";
  std::size_t idx = 0;
  os.precision(17);
  for (double u : grid.u_axis)
    for (double v : grid.v_axis) {
      os << u << ',' << v << ',' << grid.f_delta[idx] << ',' << grid.grad_norm[idx] << ','
         << grid.u1[idx] << ',' << grid.u2[idx] << ',' << grid.u3[idx] << '\n';
      ++idx;
    }
}

bool monotone_u1_check(const Instance& instance, const SmoothedLoss& loss,
                       const Vector& x0, const std::vector<double>& u_grid,
                       double tolerance) {
  if (!(x0.norm() > 0.0)) throw std::invalid_argument("monotone_u1_check: x0 must be nonzero");
  ObjectiveContext ctx(instance, loss);
  double prev = -std::numeric_limits<double>::infinity();
  for (double u : u_grid) {
    Vector x = u * x0;
    Vector g = ctx.grad_f_delta(x);
    double h = x.dot(g) / (u * u);
    if (h < prev - tolerance) return false;
    prev = h;
  }
  return true;
}

namespace {

// Spearman rank correlation
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[order[i]] = static_cast<double>(i);
    return r;
  };
  std::vector<double> rx = ranks(x), ry = ranks(y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0 || dy == 0) return 0.0;
  return num / std::sqrt(dx * dy);
}

}  // namespace

VicinityFit vicinity_radius_fit(const std::vector<VicinityPoint>& table) {
  std::vector<double> deltas, pfails;
  for (const auto& r : table) {
    deltas.push_back(r.delta);
    pfails.push_back(r.p_fail);
  }
  auto unique_sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<double> ds = unique_sorted(deltas), ps = unique_sorted(pfails);
  if (ds.size() < 3 || ps.size() < 3)
    throw std::invalid_argument("vicinity_radius_fit: need at least 3 grid points per axis");

  VicinityFit fit;
  // rel_error vs delta at each fixed p_fail
  int cnt = 0;
  for (double pf : ps) {
    std::vector<double> xs, ys;
    for (const auto& r : table)
      if (r.p_fail == pf) {
        xs.push_back(r.delta);
        ys.push_back(r.rel_error);
      }
    if (xs.size() >= 3) {
      fit.spearman_delta += spearman(xs, ys);
      ++cnt;
    }
  }
  if (cnt) fit.spearman_delta /= cnt;
  cnt = 0;
  for (double d : ds) {
    std::vector<double> xs, ys;
    for (const auto& r : table)
      if (r.delta == d) {
        xs.push_back(r.p_fail);
        ys.push_back(r.rel_error);
      }
    if (xs.size() >= 3) {
      fit.spearman_pfail += spearman(xs, ys);
      ++cnt;
    }
  }
  if (cnt) fit.spearman_pfail /= cnt;

  // least squares of rel_error against delta * p_fail / (1 - p_fail)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(table.size());
  for (const auto& r : table) {
    double x = r.delta * r.p_fail / (1.0 - r.p_fail);
    sx += x;
    sy += r.rel_error;
    sxx += x * x;
    sxy += x * r.rel_error;
  }
  double denom = n * sxx - sx * sx;
  if (denom != 0.0) {
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
  }
  return fit;
}

}  // namespace srpr
