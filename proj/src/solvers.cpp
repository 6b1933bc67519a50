#include "srpr/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace srpr {

namespace {

std::int64_t now_nanos() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double rel_error_or_neg(const Instance& inst, const Vector& x) {
  return inst.x_star ? relative_error(x, *inst.x_star) : -1.0;
}

// Backtracking line search with sufficient decrease
//   F(x - t g) <= fx - c t ||g||^2.
// Returns true on success; on success x_out/f_out hold the accepted point.
bool backtrack(const ObjectiveContext& ctx, const Vector& x, double fx, const Vector& g,
               double& t, const LineSearchSpec& ls, Vector& x_out, double& f_out) {
  const double gnorm2 = g.squaredNorm();
  for (int h = 0; h < 60; ++h) {
    x_out = x - t * g;
    f_out = ctx.f_delta(x_out);
    if (std::isfinite(f_out) && f_out <= fx - ls.sufficient_decrease * t * gnorm2) return true;
    t *= ls.shrink;
  }
  return false;
}

}  // namespace

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::Stalled: return "stalled";
  }
  return "unknown";
}

SolveResult gd_fixed(const ObjectiveContext& ctx, const Vector& x0, const SolveConfig& config) {
  if (config.fixed_step < 0.0) throw std::invalid_argument("gd_fixed: step must be >= 0");
  const std::int64_t t0 = now_nanos();
  SolveResult res;
  Vector x = x0;
  for (int k = 0; k < config.max_outer_iters; ++k) {
    Vector g = ctx.grad_f_delta(x);
    double gn = g.norm();
    double f = ctx.f_delta(x);
    if (!std::isfinite(f) || !std::isfinite(gn)) {
      res.status = SolveStatus::Stalled;
      res.x_final = x;
      res.iterations = k;
      return res;
    }
    if (config.record_trace)
      res.trace.push_back({k, f, gn, rel_error_or_neg(ctx.instance(), x), now_nanos() - t0, "gd"});
    if (gn <= config.grad_tol) {
      res.status = SolveStatus::Converged;
      res.x_final = x;
      res.iterations = k;
      return res;
    }
    x -= config.fixed_step * g;
  }
  res.status = SolveStatus::MaxIters;
  res.x_final = x;
  res.iterations = config.max_outer_iters;
  return res;
}

double estimate_step(const ObjectiveContext& ctx, int probes, std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("estimate_step: probes must be >= 1");
  const std::int64_t p = ctx.p();
  Rng rng(seed, Stream::Init);
  double lmax = 0.0;
  for (int j = 0; j < probes; ++j) {
    // probe point uniform in B(0, 4)
    Vector x(p);
    for (std::int64_t i = 0; i < p; ++i) x[i] = rng.normal();
    x /= x.norm();
    x *= 4.0 * std::pow(rng.uniform_open(), 1.0 / static_cast<double>(p));
    // power iteration for the dominant |eigenvalue| of the Hessian at x
    Vector v(p);
    for (std::int64_t i = 0; i < p; ++i) v[i] = rng.normal();
    v /= v.norm();
    double lam = 0.0;
    for (int it = 0; it < 40; ++it) {
      Vector hv = ctx.hess_vec(x, v);
      double nrm = hv.norm();
      if (nrm == 0.0) break;
      lam = nrm;
      v = hv / nrm;
    }
    lmax = std::max(lmax, lam);
  }
  if (lmax <= 0.0) lmax = 1.0;
  return 1.0 / lmax;
}

SolveResult mapg(const ObjectiveContext& ctx, const Vector& x0, const SolveConfig& config) {
  const std::int64_t tstart = now_nanos();
  SolveResult res;

  double step0 = config.line_search.init_step;
  if (step0 <= 0.0) step0 = estimate_step(ctx, 5, ctx.instance().seed);

  Vector x = x0;         // accepted iterate
  Vector x_prev = x0;
  Vector z = x0;         // extrapolated-branch iterate
  double fx = ctx.f_delta(x);
  double t_mom = 1.0, t_mom_prev = 0.0;
  double step_z = step0, step_v = step0;
  bool stalled = false;
  int iters_done = 0;

  for (int k = 0; k < config.max_outer_iters; ++k) {
    iters_done = k;
    Vector g = ctx.grad_f_delta(x);
    double gn = g.norm();
    if (!std::isfinite(fx) || !std::isfinite(gn)) {
      stalled = true;
      break;
    }
    if (config.record_trace)
      res.trace.push_back(
          {k, fx, gn, rel_error_or_neg(ctx.instance(), x), now_nanos() - tstart, "mapg"});
    if (gn <= config.grad_tol) {
      res.status = SolveStatus::Converged;
      res.x_final = x;
      res.iterations = k;
      return res;
    }

    // extrapolated point
    Vector y = x + (t_mom_prev / t_mom) * (z - x) +
               ((t_mom_prev - 1.0) / t_mom) * (x - x_prev);
    Vector gy = ctx.grad_f_delta(y);
    double fy = ctx.f_delta(y);

    Vector z_new;
    double fz = std::numeric_limits<double>::infinity();
    bool z_ok = false;
    if (std::isfinite(fy)) {
      step_z = std::min(step_z / config.line_search.shrink, 64.0 * step0);
      z_ok = backtrack(ctx, y, fy, gy, step_z, config.line_search, z_new, fz);
    }

    // reference descent step from x keeps the sequence monotone
    Vector v_new;
    double fv;
    step_v = std::min(step_v / config.line_search.shrink, 64.0 * step0);
    bool v_ok = backtrack(ctx, x, fx, g, step_v, config.line_search, v_new, fv);
    if (!v_ok && !(z_ok && fz <= fx)) {
      stalled = true;
      break;
    }

    x_prev = x;
    if (z_ok && (!v_ok || fz <= fv)) {
      x = z_new;
      fx = fz;
    } else {
      x = v_new;
      fx = fv;
    }
    if (z_ok) {
      z = z_new;
    } else {
      // restart momentum when the extrapolated branch fails
      z = x;
      t_mom = 1.0;
      t_mom_prev = 0.0;
      continue;
    }
    t_mom_prev = t_mom;
    t_mom = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
  }
  res.status = stalled ? SolveStatus::Stalled : SolveStatus::MaxIters;
  res.x_final = x;
  res.iterations = stalled ? iters_done : config.max_outer_iters;
  return res;
}

Vector prox_linear_step(const Instance& instance, const Vector& x_k, double beta,
                        double inner_eps) {
  if (!(beta > 0.0)) throw std::invalid_argument("prox_linear_step: beta must be positive");
  const std::int64_t n = instance.n();
  const double inv_n = 1.0 / static_cast<double>(n);

  Vector ax = instance.ensemble.apply(x_k);
  Vector c = ax.array().square() - instance.b.array();
  // G has rows g_i = 2 (a_i^T x_k) a_i: G d = 2 ax .* (A d), G^T u = 2 A^T (ax .* u)
  auto apply_g = [&](const Vector& d) { return Vector(2.0 * ax.cwiseProduct(instance.ensemble.apply(d))); };
  auto apply_gt = [&](const Vector& u) { return instance.ensemble.apply_adjoint(2.0 * ax.cwiseProduct(u)); };

  // Lipschitz constant of the dual gradient: sigma_max(G)^2 / beta
  double sigma2 = 0.0;
  {
    Rng rng(instance.seed ^ 0x5057ULL, Stream::Init);
    Vector v(n);
    for (std::int64_t i = 0; i < n; ++i) v[i] = rng.normal();
    double nrm = v.norm();
    if (nrm == 0.0) v[0] = nrm = 1.0;
    v /= nrm;
    for (int it = 0; it < 30; ++it) {
      Vector w = apply_g(apply_gt(v));
      double wn = w.norm();
      if (wn == 0.0) break;
      sigma2 = wn;
      v = w / wn;
    }
  }
  if (sigma2 <= 0.0) {
    // G == 0 (x_k = 0); the quadratic term alone fixes d = 0
    return x_k;
  }
  const double lip = sigma2 / beta;
  const double step = 1.0 / lip;
  const double box = inv_n;

  auto project = [&](Vector& lam) {
    for (std::int64_t i = 0; i < n; ++i) lam[i] = std::clamp(lam[i], -box, box);
  };
  auto primal_from_dual = [&](const Vector& lam) { return Vector(-apply_gt(lam) / beta); };
  auto dual_value = [&](const Vector& lam, const Vector& gtlam) {
    return lam.dot(c) - gtlam.squaredNorm() / (2.0 * beta);
  };
  auto primal_value = [&](const Vector& d) {
    Vector r = c + apply_g(d);
    return inv_n * r.lpNorm<1>() + 0.5 * beta * d.squaredNorm();
  };

  Vector lam = Vector::Zero(n);
  Vector lam_prev = lam;
  Vector ycur = lam;
  double t_mom = 1.0;
  const int max_inner = 100000;
  for (int it = 0; it < max_inner; ++it) {
    // gradient ascent step on D at the extrapolated point
    Vector gt_y = apply_gt(ycur);
    Vector grad = c - apply_g(gt_y) / beta;
    lam_prev = lam;
    lam = ycur + step * grad;
    project(lam);
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
    ycur = lam + ((t_mom - 1.0) / t_next) * (lam - lam_prev);
    t_mom = t_next;

    if (it % 10 == 9 || it == max_inner - 1) {
      Vector gtlam = apply_gt(lam);
      double dval = dual_value(lam, gtlam);
      if (!std::isfinite(dval)) throw std::runtime_error("prox_linear_step: non-finite dual value");
      Vector d = -gtlam / beta;
      double pval = primal_value(d);
      if (pval - dval <= inner_eps) return x_k + d;
    }
  }
  return x_k + primal_from_dual(lam);
}

SolveResult ipl(const Instance& instance, const Vector& x0, const IplConfig& config) {
  const std::int64_t tstart = now_nanos();
  SolveResult res;
  ObjectiveContext ctx(instance, SmoothedLoss(KernelKind::PseudoHuberGen, 1.0));  // for f_ell1 only

  Vector x = x0;
  if (!x.allFinite()) throw std::invalid_argument("ipl: x0 must be finite");
  double fx = ctx.f_ell1(x);
  double beta = config.beta;
  double eps = config.inner_eps0 > 0.0 ? config.inner_eps0 : std::max(1e-3 * fx, 1e-15);
  const double stop_tol =
      config.stop_tol > 0.0 ? config.stop_tol : 1e-10 * std::max(1.0, x0.norm());

  for (int k = 0; k < config.max_outer; ++k) {
    Vector x_new;
    double f_new = 0.0, step_norm = 0.0;
    // grow beta (and tighten the inner tolerance, so that rejections caused
    // by an inaccurate subproblem solution do not inflate beta permanently)
    // until the quadratic-decrease acceptance test passes
    bool accepted = false;
    for (int r = 0; r < 60; ++r) {
      x_new = prox_linear_step(instance, x, beta, eps);
      step_norm = (x_new - x).norm();
      f_new = ctx.f_ell1(x_new);
      if (f_new <= fx - 0.25 * beta * step_norm * step_norm) {
        accepted = true;
        break;
      }
      beta *= config.beta_growth;
      eps *= 0.25;
    }
    if (!accepted) {
      res.status = SolveStatus::Stalled;
      res.x_final = x;
      res.iterations = k;
      return res;
    }
    x = x_new;
    fx = f_new;
    if (config.record_trace)
      res.trace.push_back(
          {k, fx, step_norm, rel_error_or_neg(instance, x), now_nanos() - tstart, "ipl"});
    eps *= config.inner_shrink;
    // back off beta after an accepted step; a rejection streak early on must
    // not cap the step size for the rest of the run
    beta = std::max(config.beta, beta / config.beta_growth);
    if (step_norm <= stop_tol) {
      res.status = SolveStatus::Converged;
      res.x_final = x;
      res.iterations = k + 1;
      return res;
    }
  }
  res.status = SolveStatus::MaxIters;
  res.x_final = x;
  res.iterations = config.max_outer;
  return res;
}

Vector make_init(const Instance& instance, const InitSpec& init, std::uint64_t seed) {
  if (init.kind == InitKind::Random) return random_init(init.random, instance.p(), seed);
  return spectral_init(instance, init.spectral);
}

SolveResult srpr_pipeline(const Instance& instance, const SmoothedLoss& loss,
                          const InitSpec& init, const PipelineConfig& config,
                          std::uint64_t seed) {
  ObjectiveContext ctx(instance, loss);
  Vector x0 = make_init(instance, init, seed);
  SolveResult phase1 = mapg(ctx, x0, config.smooth);
  if (!config.use_finisher) return phase1;
  SolveResult phase2 = ipl(instance, phase1.x_final, config.finisher);
  SolveResult merged;
  merged.x_final = phase2.x_final;
  merged.status = phase2.status;
  merged.iterations = phase1.iterations + phase2.iterations;
  merged.trace = std::move(phase1.trace);
  for (auto& row : phase2.trace) {
    row.iter += phase1.iterations;
    merged.trace.push_back(row);
  }
  return merged;
}

}  // namespace srpr
