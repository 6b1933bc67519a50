#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "srpr/landscape.hpp"
#include "srpr/rng.hpp"

using namespace srpr;

namespace {

Instance make_instance(std::int64_t p, std::int64_t n, std::uint64_t seed,
                       double p_fail = 0.0) {
  auto ens = SensingEnsemble::dense_gaussian(p, n, seed);
  Rng rng(seed + 1);
  Vector x(p);
  for (std::int64_t i = 0; i < p; ++i) x[i] = rng.normal();
  x /= x.norm();
  return generate_instance(ens, x,
                           CorruptionSpec{p_fail, CorruptionKind::Zeroing, 0.0},
                           seed + 2);
}

}  // namespace

TEST_CASE("gauss_hermite integrates Gaussian moments exactly") {
  for (int n : {5, 16, 64}) {
    auto gh = gauss_hermite(n);
    REQUIRE(gh.nodes.size() == std::size_t(n));
    double wsum = 0.0, m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
      wsum += gh.weights[i];
      double z = std::sqrt(2.0) * gh.nodes[i];
      m2 += gh.weights[i] * z * z;
      m4 += gh.weights[i] * z * z * z * z;
    }
    const double spi = std::sqrt(M_PI);
    CHECK(wsum == doctest::Approx(spi).epsilon(1e-12));
    CHECK(m2 / spi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 / spi == doctest::Approx(3.0).epsilon(1e-12));
    // nodes sorted and symmetric
    for (int i = 1; i < n; ++i) CHECK(gh.nodes[i] > gh.nodes[i - 1]);
    for (int i = 0; i < n; ++i)
      CHECK(gh.nodes[i] == doctest::Approx(-gh.nodes[n - 1 - i]).epsilon(1e-12));
  }
}

TEST_CASE("gauss_hermite integrates a smooth non-polynomial") {
  // E[exp(Z)] = exp(1/2)
  auto gh = gauss_hermite(40);
  double s = 0.0;
  for (int i = 0; i < 40; ++i)
    s += gh.weights[i] * std::exp(std::sqrt(2.0) * gh.nodes[i]);
  CHECK(s / std::sqrt(M_PI) == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
}

TEST_CASE("population probes vanish at the signal and on the stationary ring") {
  for (double delta : {0.25, 0.05}) {
    PopulationProbe probe(SmoothedLoss{KernelKind::Gaussian, delta});
    // at x = x_star the residual (g1^2 - g1^2) is identically zero and l' is
    // odd, so U1 and U3 vanish
    CHECK(std::abs(probe.u1(1.0, 0.0)) <= 1e-9);
    CHECK(std::abs(probe.u3(1.0, 0.0)) <= 1e-9);
    // orthogonal direction: U3 vanishes by symmetry for any radius
    CHECK(std::abs(probe.u3(0.0, 0.7)) <= 1e-9);
    // on the ring radius solving the stationarity equation, U1 = 0
    double u = probe.solve_u_delta();
    CHECK(std::abs(probe.u1(0.0, u)) <= 1e-6);
    CHECK(std::abs(probe.ring_equation(u)) <= 1e-6);
  }
}

TEST_CASE("quadrature probes agree with Monte Carlo") {
  PopulationProbe probe(SmoothedLoss{KernelKind::Logistic, 0.25});
  double c = 0.6, s = 0.5;
  double mc1 = probe.u1_mc(c, s, 4000000, 17);
  double mc2 = probe.u2_mc(c, s, 4000000, 18);
  CHECK(probe.u1(c, s) == doctest::Approx(mc1).epsilon(0.02));
  CHECK(probe.u2(c, s) == doctest::Approx(mc2).epsilon(0.05));
}

TEST_CASE("ring equation changes sign across the root") {
  PopulationProbe probe(SmoothedLoss{KernelKind::Gaussian, 0.05});
  double u = probe.solve_u_delta();
  CHECK(probe.ring_equation(0.5 * u) < 0.0);
  CHECK(probe.ring_equation(1.5 * u) > 0.0);
}

TEST_CASE("u0_limit solves its equation and matches the known value") {
  double u0 = u0_limit();
  CHECK(std::atan(u0) + u0 / (u0 * u0 + 1.0) == doctest::Approx(M_PI / 4.0).epsilon(1e-12));
  CHECK(u0 == doctest::Approx(0.4416).epsilon(1e-3));
}

TEST_CASE("stationary radius at small delta approaches u0 for every kernel") {
  double u0 = u0_limit();
  for (auto kind : {KernelKind::Gaussian, KernelKind::Logistic,
                    KernelKind::Epanechnikov, KernelKind::Triangular,
                    KernelKind::PseudoHuberGen}) {
    PopulationProbe probe(SmoothedLoss{kind, 0.02});
    CHECK(probe.solve_u_delta() == doctest::Approx(u0).epsilon(0.05));
  }
}

TEST_CASE("limiting_u2 closed form") {
  // at u = 1: 16/(4 pi) + (8/pi)(pi/4 - pi/4 - 1/2) = 4/pi - 4/pi = 0
  CHECK(limiting_u2(1.0) == doctest::Approx(0.0).epsilon(1e-12));
  // negative curvature at the limiting stationary radius
  double v = limiting_u2(u0_limit());
  CHECK(v < -1.5);
  CHECK(v > -1.65);
  // large u: tends to 2 from below
  CHECK(limiting_u2(50.0) > 1.9);
  CHECK(limiting_u2(50.0) < 2.0);
}

TEST_CASE("limiting_u2 matches the small-delta quadrature") {
  // independent oracle: evaluate U2 on the orthogonal circle at a small delta
  PopulationProbe probe(SmoothedLoss{KernelKind::Gaussian, 0.004});
  for (double u : {0.4416, 0.8, 1.5}) {
    CHECK(probe.u2(0.0, u) == doctest::Approx(limiting_u2(u)).epsilon(0.03));
  }
}

TEST_CASE("population probe rejects tiny node counts") {
  CHECK_THROWS(PopulationProbe(SmoothedLoss{KernelKind::Gaussian, 0.1}, 8));
}

TEST_CASE("empirical_scan localizes the stationary structure") {
  auto inst = make_instance(48, 48 * 16, 2025);
  SmoothedLoss loss{KernelKind::Gaussian, 0.25};
  std::vector<double> u_axis, v_axis;
  for (int i = 0; i <= 24; ++i) u_axis.push_back(-1.5 + i * 0.125);
  for (int i = 0; i <= 12; ++i) v_axis.push_back(i * 0.125);
  auto grid = empirical_scan(inst, loss, u_axis, v_axis);
  REQUIRE(grid.f_delta.size() == u_axis.size() * v_axis.size());

  auto at = [&](std::size_t iu, std::size_t iv) {
    return iu * v_axis.size() + iv;
  };
  // the truth lives at (u, v) = (+-1, 0); both should be near-global minima
  // with a tiny gradient
  std::size_t iu_pos = 20, iu_neg = 4, iv0 = 0;  // u = 1, u = -1, v = 0
  CHECK(u_axis[iu_pos] == doctest::Approx(1.0));
  CHECK(u_axis[iu_neg] == doctest::Approx(-1.0));
  double f_truth = grid.f_delta[at(iu_pos, iv0)];
  double g_truth = grid.grad_norm[at(iu_pos, iv0)];
  CHECK(grid.f_delta[at(iu_neg, iv0)] == doctest::Approx(f_truth).epsilon(1e-10));
  int lower = 0;
  for (double f : grid.f_delta)
    if (f < f_truth - 1e-9) ++lower;
  CHECK(lower == 0);
  // gradient at the truth is much smaller than at a generic grid point
  CHECK(g_truth < 0.2 * grid.grad_norm[at(12, 6)]);
  // grid symmetry under the global sign flip (u, v) -> (-u, -v) holds on the
  // v = 0 line
  for (std::size_t iu = 0; iu < u_axis.size(); ++iu)
    CHECK(grid.f_delta[at(iu, 0)] ==
          doctest::Approx(grid.f_delta[at(u_axis.size() - 1 - iu, 0)]).epsilon(1e-10));
}

TEST_CASE("write_grid_csv emits a header plus one row per cell") {
  LandscapeGrid grid;
  grid.u_axis = {0.0, 1.0};
  grid.v_axis = {0.5};
  grid.f_delta = {1.0, 2.0};
  grid.grad_norm = {0.1, 0.2};
  grid.u1 = {0.0, 0.1};
  grid.u2 = {-1.0, 1.0};
  grid.u3 = {0.0, 0.0};
  std::string path = "grid_test.csv";
  write_grid_csv(grid, path);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "u,v,f_delta,grad_norm,u1,u2,u3");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
  std::remove(path.c_str());
}

TEST_CASE("monotone_u1_check on empirical data") {
  auto inst = make_instance(32, 32 * 16, 77);
  SmoothedLoss loss{KernelKind::Gaussian, 0.25};
  Vector x0 = Vector::Unit(32, 3) + 0.3 * Vector::Unit(32, 7);
  x0 /= x0.norm();
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.2 + 0.15 * i);
  CHECK(monotone_u1_check(inst, loss, x0, grid, 1e-9));
}

TEST_CASE("vicinity_radius_fit on a synthetic linear law") {
  std::vector<VicinityPoint> table;
  Rng rng(5);
  for (double delta : {0.1, 0.25, 0.5}) {
    for (double pf : {0.05, 0.1, 0.2}) {
      double x = delta * pf / (1.0 - pf);
      table.push_back({delta, pf, 2.0 * x + 0.001 * rng.uniform(0.0, 1.0)});
    }
  }
  auto fit = vicinity_radius_fit(table);
  CHECK(fit.spearman_delta > 0.9);
  CHECK(fit.spearman_pfail > 0.9);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::abs(fit.intercept) < 0.01);
}

TEST_CASE("vicinity_radius_fit rejects degenerate tables") {
  std::vector<VicinityPoint> table = {{0.1, 0.05, 0.01}, {0.25, 0.05, 0.02}};
  CHECK_THROWS(vicinity_radius_fit(table));
}
