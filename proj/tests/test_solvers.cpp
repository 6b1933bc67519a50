#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "srpr/solvers.hpp"

using namespace srpr;

namespace {

Instance make_instance(std::int64_t p, std::int64_t n, std::uint64_t seed,
                       double p_fail = 0.0,
                       CorruptionKind kind = CorruptionKind::Zeroing) {
  auto ens = SensingEnsemble::dense_gaussian(p, n, seed);
  Rng rng(seed + 1);
  Vector x(p);
  for (std::int64_t i = 0; i < p; ++i) x[i] = rng.normal();
  x *= std::sqrt(double(p)) / x.norm();
  return generate_instance(ens, x, CorruptionSpec{p_fail, kind, 0.0}, seed + 2);
}

// brute-force minimizer of G(d) = (1/n) sum |c_i + g_i^T d| + (beta/2)||d||^2
// by projected subgradient descent with averaging, small dims only
Vector brute_force_prox(const Matrix& g, const Vector& c, double beta, int iters) {
  std::int64_t p = g.cols(), n = g.rows();
  Vector d = Vector::Zero(p);
  Vector best = d;
  auto value = [&](const Vector& dd) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += std::abs(c[i] + g.row(i).dot(dd));
    return s / double(n) + 0.5 * beta * dd.squaredNorm();
  };
  double best_val = value(d);
  for (int t = 1; t <= iters; ++t) {
    Vector sub = beta * d;
    for (std::int64_t i = 0; i < n; ++i) {
      double r = c[i] + g.row(i).dot(d);
      double s = r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0);
      sub += (s / double(n)) * g.row(i).transpose();
    }
    d -= (0.5 / (beta * t)) * sub;
    double v = value(d);
    if (v < best_val) {
      best_val = v;
      best = d;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("gd_fixed descends a simple smoothed objective") {
  auto inst = make_instance(8, 64, 11);
  ObjectiveContext ctx(inst, SmoothedLoss{KernelKind::Gaussian, 0.5});
  Vector x0 = *inst.x_star + 0.1 * Vector::Ones(8);
  SolveConfig cfg;
  cfg.max_outer_iters = 300;
  cfg.fixed_step = estimate_step(ctx, 20, 5);
  auto res = gd_fixed(ctx, x0, cfg);
  CHECK(res.trace.size() >= 2);
  CHECK(res.trace.back().objective < res.trace.front().objective);
  CHECK(ctx.f_delta(res.x_final) <= ctx.f_delta(x0));
  // grad norms recorded and decreasing overall
  CHECK(res.trace.back().grad_norm < res.trace.front().grad_norm);
}

TEST_CASE("gd_fixed converges on a noiseless well-posed instance") {
  auto inst = make_instance(16, 256, 21);
  ObjectiveContext ctx(inst, SmoothedLoss{KernelKind::Gaussian, 0.25});
  Vector x0 = *inst.x_star * 1.2;
  SolveConfig cfg;
  cfg.max_outer_iters = 20000;
  cfg.grad_tol = 1e-10;
  cfg.fixed_step = estimate_step(ctx, 30, 5);
  auto res = gd_fixed(ctx, x0, cfg);
  CHECK(relative_error(res.x_final, *inst.x_star) < 0.05);
}

TEST_CASE("estimate_step scales like delta") {
  auto inst = make_instance(12, 120, 31);
  ObjectiveContext small(inst, SmoothedLoss{KernelKind::Gaussian, 0.05});
  ObjectiveContext large(inst, SmoothedLoss{KernelKind::Gaussian, 0.5});
  double ts = estimate_step(small, 25, 7);
  double tl = estimate_step(large, 25, 7);
  CHECK(ts > 0.0);
  CHECK(tl > 0.0);
  // curvature grows as delta shrinks (how fast depends on where the probe
  // points land relative to the kink), so the small-delta step is smaller
  CHECK(tl / ts > 1.5);
  CHECK(tl / ts < 20.0);
}

TEST_CASE("mapg trace is monotone nonincreasing") {
  auto inst = make_instance(16, 128, 41, 0.1, CorruptionKind::HalfCauchy);
  ObjectiveContext ctx(inst, SmoothedLoss{KernelKind::Logistic, 0.25});
  Vector x0 = make_init(inst, InitSpec{}, 999);
  SolveConfig cfg;
  cfg.max_outer_iters = 400;
  auto res = mapg(ctx, x0, cfg);
  REQUIRE(res.trace.size() >= 2);
  for (std::size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i].objective <= res.trace[i - 1].objective + 1e-13);
}

TEST_CASE("mapg converges fast on noiseless data and beats gd") {
  auto inst = make_instance(32, 256, 51);
  ObjectiveContext ctx(inst, SmoothedLoss{KernelKind::Gaussian, 0.25});
  Vector x0 = *inst.x_star * 1.3;
  SolveConfig cfg;
  cfg.max_outer_iters = 2000;
  cfg.grad_tol = 1e-12;
  auto res = mapg(ctx, x0, cfg);
  CHECK(relative_error(res.x_final, *inst.x_star) < 1e-5);

  SolveConfig gcfg = cfg;
  gcfg.fixed_step = estimate_step(ctx, 25, 5);
  auto gres = gd_fixed(ctx, x0, gcfg);
  CHECK(res.iterations <= gres.iterations);
}

TEST_CASE("mapg respects grad_tol stopping") {
  auto inst = make_instance(8, 96, 61);
  ObjectiveContext ctx(inst, SmoothedLoss{KernelKind::Gaussian, 0.5});
  SolveConfig cfg;
  cfg.grad_tol = 1e-7;
  cfg.max_outer_iters = 5000;
  auto res = mapg(ctx, *inst.x_star * 1.1, cfg);
  CHECK(res.status == SolveStatus::Converged);
  CHECK(ctx.grad_f_delta(res.x_final).norm() <= 1e-7);
}

TEST_CASE("solvers are equivariant under the global sign flip") {
  auto inst = make_instance(8, 80, 71);
  ObjectiveContext ctx(inst, SmoothedLoss{KernelKind::Gaussian, 0.3});
  Vector x0 = make_init(inst, InitSpec{}, 5);
  SolveConfig cfg;
  cfg.max_outer_iters = 200;
  auto a = mapg(ctx, x0, cfg);
  auto b = mapg(ctx, Vector(-x0), cfg);
  CHECK((a.x_final + b.x_final).norm() <= 1e-10 * std::max(1.0, a.x_final.norm()));
}

TEST_CASE("prox_linear_step hand examples") {
  // n = 1, a = (1, 0), x_k = (1, 0), b = 1: linearization has
  // c_1 = (a^T x_k)^2 - b = 0, g_1 = 2 (a^T x_k) a = (2, 0), so
  // G(d) = |2 d_1| + (beta/2)||d||^2, minimized at d = 0.
  Matrix rows(1, 2);
  rows << 1.0, 0.0;
  Instance inst;
  inst.ensemble = SensingEnsemble::dense_from_rows(rows);
  inst.b = Vector::Constant(1, 1.0);
  Vector xk(2);
  xk << 1.0, 0.0;
  Vector x1 = prox_linear_step(inst, xk, 1.0, 1e-10);
  CHECK((x1 - xk).norm() <= 1e-8);

  // b = 5: c = -4, so G(d) = |2 d_1 - 4| + (1/2)||d||^2. d_2 = 0 and for
  // d_1 < 2 the derivative is -2 + d_1, vanishing exactly at the kink
  // d_1 = 2; verify against a fine scan.
  inst.b = Vector::Constant(1, 5.0);
  Vector x2 = prox_linear_step(inst, xk, 1.0, 1e-12);
  double best_d = 0.0, best_v = 1e300;
  for (int i = -4000; i <= 4000; ++i) {
    double d = i * 1e-3;
    double v = std::abs(2.0 * d - 4.0) + 0.5 * d * d;
    if (v < best_v) {
      best_v = v;
      best_d = d;
    }
  }
  CHECK(std::abs((x2[0] - 1.0) - best_d) <= 1e-3);
  CHECK(std::abs(x2[1]) <= 1e-8);
}

TEST_CASE("prox_linear_step matches a brute-force subgradient solver") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    std::int64_t p = 4, n = 10;
    auto inst = make_instance(p, n, 100 + seed);
    Rng rng(seed);
    Vector xk(p);
    for (std::int64_t i = 0; i < p; ++i) xk[i] = rng.normal();
    double beta = 2.0;

    Vector x1 = prox_linear_step(inst, xk, beta, 1e-12);
    Vector d_solver = x1 - xk;

    Vector ax = inst.ensemble.apply(xk);
    Matrix a = inst.ensemble.dense();
    Vector c(n);
    Matrix g(n, p);
    for (std::int64_t i = 0; i < n; ++i) {
      c[i] = ax[i] * ax[i] - inst.b[i];
      g.row(i) = 2.0 * ax[i] * a.row(i);
    }
    Vector d_brute = brute_force_prox(g, c, beta, 2000000);
    auto value = [&](const Vector& dd) {
      double s = 0.0;
      for (std::int64_t i = 0; i < n; ++i) s += std::abs(c[i] + g.row(i).dot(dd));
      return s / double(n) + 0.5 * beta * dd.squaredNorm();
    };
    // compare objective values: both should agree to high accuracy
    CHECK(value(d_solver) <= value(d_brute) + 1e-6);
  }
}

TEST_CASE("ipl converges from a warm start on corrupted data") {
  std::int64_t p = 32, n = 8 * p;
  auto inst = make_instance(p, n, 303, 0.1, CorruptionKind::HalfCauchy);
  // warm start near truth (IPL is a local method)
  Rng rng(4);
  Vector noise(p);
  for (std::int64_t i = 0; i < p; ++i) noise[i] = rng.normal();
  Vector x0 = *inst.x_star + 0.05 * noise;
  IplConfig cfg;
  auto res = ipl(inst, x0, cfg);
  CHECK(relative_error(res.x_final, *inst.x_star) < 1e-6);
}

TEST_CASE("ipl stops immediately at an exact solution") {
  auto inst = make_instance(8, 64, 17);
  IplConfig cfg;
  auto res = ipl(inst, *inst.x_star, cfg);
  CHECK(res.iterations <= 2);
  CHECK(relative_error(res.x_final, *inst.x_star) <= 1e-12);
}

TEST_CASE("ipl trace of F is nonincreasing") {
  auto inst = make_instance(16, 128, 27, 0.1, CorruptionKind::Zeroing);
  Rng rng(9);
  Vector noise(16);
  for (int i = 0; i < 16; ++i) noise[i] = rng.normal();
  Vector x0 = *inst.x_star + 0.2 * noise;
  IplConfig cfg;
  auto res = ipl(inst, x0, cfg);
  for (std::size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i].objective <= res.trace[i - 1].objective + 1e-12);
}

TEST_CASE("pipeline: random init + mapg solves the noiseless problem") {
  std::int64_t p = 64, n = 8 * p;
  int good = 0;
  for (int s = 0; s < 5; ++s) {
    auto inst = make_instance(p, n, 700 + 11 * s);
    PipelineConfig cfg;
    cfg.smooth.max_outer_iters = 4000;
    cfg.smooth.grad_tol = 1e-12;
    auto res = srpr_pipeline(inst, SmoothedLoss{KernelKind::Gaussian, 0.25},
                             InitSpec{}, cfg, 50 + s);
    if (relative_error(res.x_final, *inst.x_star) <= 1e-5) ++good;
  }
  CHECK(good >= 4);
}

TEST_CASE("pipeline: spectral init + ipl finisher on corrupted data") {
  std::int64_t p = 64, n = 8 * p;
  auto inst = make_instance(p, n, 811, 0.1, CorruptionKind::HalfCauchy);
  PipelineConfig cfg;
  cfg.smooth.max_outer_iters = 3000;
  cfg.use_finisher = true;
  InitSpec init;
  init.kind = InitKind::Spectral;
  auto res = srpr_pipeline(inst, SmoothedLoss{KernelKind::Gaussian, 0.25}, init,
                           cfg, 3);
  CHECK(relative_error(res.x_final, *inst.x_star) <= 1e-6);
  // trace contains both phases
  bool has_mapg = false, has_ipl = false;
  for (auto& row : res.trace) {
    if (row.phase == "mapg") has_mapg = true;
    if (row.phase == "ipl") has_ipl = true;
  }
  CHECK(has_mapg);
  CHECK(has_ipl);
}

TEST_CASE("status names") {
  CHECK(status_name(SolveStatus::Converged) == "converged");
  CHECK(status_name(SolveStatus::MaxIters) == "max_iters");
  CHECK(status_name(SolveStatus::Stalled) == "stalled");
}
