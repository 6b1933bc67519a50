#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srpr/initialization.hpp"
#include "srpr/objective.hpp"

namespace srpr {

enum class SolveStatus { Converged, MaxIters, Stalled };

std::string status_name(SolveStatus s);

struct TraceRow {
  int iter = 0;
  double objective = 0.0;   // F_delta for smooth phases, F for IPL
  double grad_norm = 0.0;   // step norm for IPL rows
  double rel_error = -1.0;  // -1 when ground truth is unknown
  std::int64_t wall_nanos = 0;
  std::string phase;        // "mapg", "gd", "ipl"
};

struct SolveResult {
  Vector x_final;
  SolveStatus status = SolveStatus::MaxIters;
  std::vector<TraceRow> trace;
  int iterations = 0;
};

struct LineSearchSpec {
  double init_step = 0.0;  // 0 => estimate from curvature probes
  double shrink = 0.5;     // beta_ls
  double sufficient_decrease = 1e-4;  // c_ls
};

struct SolveConfig {
  int max_outer_iters = 10000;
  double grad_tol = 1e-12;
  double fixed_step = 0.0;  // gd_fixed
  LineSearchSpec line_search;
  bool record_trace = true;
};

struct IplConfig {
  double beta = 1.0;
  double beta_growth = 2.0;
  double inner_eps0 = -1.0;     // <0 => 1e-3 * F(x0)
  double inner_shrink = 0.5;    // eps_k = eps0 * q^k
  int max_outer = 200;
  double stop_tol = -1.0;       // <0 => 1e-10 * max(1, ||x0||)
  bool record_trace = true;
};

// x_{k+1} = x_k - t grad F_delta(x_k), fixed step
SolveResult gd_fixed(const ObjectiveContext& ctx, const Vector& x0, const SolveConfig& config);

// t = 1 / (max sampled Hessian operator norm over probe points in B(0,4))
double estimate_step(const ObjectiveContext& ctx, int probes, std::uint64_t seed);

// Monotone accelerated gradient with backtracking line search: each iteration
// takes both an extrapolated step and a plain descent step and keeps the
// better one, so the F_delta trace never increases.
SolveResult mapg(const ObjectiveContext& ctx, const Vector& x0, const SolveConfig& config);

// One inexact prox-linear step: approximately minimize
//   G(d) = (1/n) sum |c_i + g_i^T d| + (beta/2)||d||^2
// via accelerated projected gradient on the box-constrained dual, stopping at
// duality gap <= inner_eps. Returns x_k + d.
Vector prox_linear_step(const Instance& instance, const Vector& x_k, double beta,
                        double inner_eps);

// Outer prox-linear loop on the unsmoothed objective F.
SolveResult ipl(const Instance& instance, const Vector& x0, const IplConfig& config);

struct PipelineConfig {
  SolveConfig smooth;   // MAPG phase on F_delta
  IplConfig finisher;   // IPL phase on F
  bool use_finisher = false;
};

enum class InitKind { Random, Spectral };

struct InitSpec {
  InitKind kind = InitKind::Random;
  RandomSphereSpec random;
  SpectralSpec spectral;
};

Vector make_init(const Instance& instance, const InitSpec& init, std::uint64_t seed);

// init -> MAPG on F_delta -> optionally IPL on F; merged trace tagged by phase
SolveResult srpr_pipeline(const Instance& instance, const SmoothedLoss& loss,
                          const InitSpec& init, const PipelineConfig& config,
                          std::uint64_t seed);

}  // namespace srpr
