#include "srpr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace srpr {

namespace {

std::int64_t now_nanos() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename T>
T median_of(std::vector<T> v) {
  if (v.empty()) return T{};
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// sign pattern x_star in (1/sqrt(p)) {-1, 1}^p, as in the simulated protocol
Vector sign_truth(std::int64_t p, std::uint64_t seed) {
  Rng rng(seed, Stream::Init);
  Vector x(p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (std::int64_t i = 0; i < p; ++i) x[i] = scale * static_cast<double>(rng.sign());
  return x;
}

InitSpec init_from_name(const std::string& name, double quantile) {
  InitSpec init;
  if (name == "random") {
    init.kind = InitKind::Random;
  } else if (name == "spectral") {
    init.kind = InitKind::Spectral;
    init.spectral.quantile = quantile;
  } else {
    throw std::invalid_argument("unknown init: " + name);
  }
  return init;
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t cell_index,
                             std::uint64_t replicate) {
  return mix64(mix64(master ^ (0xC2B2AE3D27D4EB4FULL * (cell_index + 1))) ^
               (0x165667B19E3779F9ULL * (replicate + 1)));
}

ExperimentConfig config_from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config_from_json_file: cannot open " + path);
  nlohmann::json j;
  is >> j;
  ExperimentConfig cfg;
  cfg.p = j.value("p", cfg.p);
  if (j.contains("k_grid")) cfg.k_grid = j["k_grid"].get<std::vector<double>>();
  if (j.contains("p_fail_grid")) cfg.p_fail_grid = j["p_fail_grid"].get<std::vector<double>>();
  if (j.contains("corruption"))
    cfg.corruption = j["corruption"] == "zero" ? CorruptionKind::Zeroing : CorruptionKind::HalfCauchy;
  cfg.gamma = j.value("gamma", cfg.gamma);
  if (j.contains("kernel")) cfg.kernel = kernel_from_name(j["kernel"].get<std::string>());
  if (j.contains("delta")) {
    const auto& d = j["delta"];
    cfg.delta.kind = d.value("policy", "fixed") == "heuristic" ? DeltaPolicyKind::Heuristic
                                                               : DeltaPolicyKind::Fixed;
    cfg.delta.value = d.value("value", cfg.delta.value);
  }
  if (j.contains("ensemble"))
    cfg.ensemble = j["ensemble"] == "hadamard" ? EnsembleKind::RandomizedHadamard
                                               : EnsembleKind::DenseGaussian;
  cfg.replicates = j.value("replicates", cfg.replicates);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.grad_tol = j.value("grad_tol", cfg.grad_tol);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.out_rows = j.value("out_rows", cfg.out_rows);
  cfg.out_aggregate = j.value("out_aggregate", cfg.out_aggregate);
  if (j.contains("algorithms")) {
    cfg.algorithms.clear();
    for (const auto& a : j["algorithms"]) {
      AlgorithmSpec spec;
      spec.name = a.at("name").get<std::string>();
      spec.init = init_from_name(a.value("init", "random"), a.value("init_quantile", 0.5));
      spec.finisher = a.value("finisher", false);
      spec.success_threshold =
          a.value("success_threshold", a.value("threshold", 1e-6));
      cfg.algorithms.push_back(spec);
    }
  }
  if (cfg.algorithms.empty()) {
    AlgorithmSpec ri;
    ri.name = "srpr-ri";
    ri.init = init_from_name("random", 0.5);
    cfg.algorithms.push_back(ri);
  }
  return cfg;
}

namespace {

struct Task {
  std::size_t cell_index = 0;
  std::size_t algo_index = 0;
  double k = 0.0;
  double p_fail = 0.0;
  int replicate = 0;
};

SweepRow run_task(const ExperimentConfig& config, const Task& task, double success_threshold) {
  const AlgorithmSpec& algo = config.algorithms[task.algo_index];
  const std::uint64_t seed = replicate_seed(
      config.seed, task.cell_index,
      static_cast<std::uint64_t>(task.replicate));

  const auto n = static_cast<std::int64_t>(std::llround(task.k * static_cast<double>(config.p)));
  SensingEnsemble ensemble =
      config.ensemble == EnsembleKind::DenseGaussian
          ? SensingEnsemble::dense_gaussian(config.p, n, seed)
          : SensingEnsemble::randomized_hadamard(
                config.p, static_cast<std::int64_t>(std::llround(task.k)), seed);
  Vector x_star = sign_truth(config.p, seed ^ 0xA5A5ULL);
  CorruptionSpec corruption{task.p_fail, config.corruption, config.gamma};
  Instance inst = generate_instance(std::move(ensemble), x_star, corruption, seed);

  double delta = config.delta.value;
  if (config.delta.kind == DeltaPolicyKind::Heuristic)
    delta = delta_heuristic(inst, config.delta.value, x_star.norm());
  SmoothedLoss loss(config.kernel, delta);

  PipelineConfig pipe;
  pipe.smooth.max_outer_iters = config.max_iters;
  pipe.smooth.grad_tol = config.grad_tol;
  pipe.smooth.record_trace = false;
  pipe.use_finisher = algo.finisher;
  pipe.finisher.record_trace = false;
  if (config.gamma > 0.0) pipe.finisher.stop_tol = 1e-3 * config.gamma;

  const std::int64_t t0 = now_nanos();
  SweepRow row;
  row.k = task.k;
  row.p_fail = task.p_fail;
  row.algorithm = algo.name;
  row.replicate = task.replicate;
  row.seed = seed;
  try {
    SolveResult res = srpr_pipeline(inst, loss, algo.init, pipe, seed);
    row.rel_error = relative_error(res.x_final, x_star);
    row.success = row.rel_error <= success_threshold;
    row.iterations = res.iterations;
    row.status = status_name(res.status);
  } catch (const std::exception& e) {
    row.rel_error = std::numeric_limits<double>::infinity();
    row.success = false;
    row.status = std::string("error: ") + e.what();
  }
  row.wall_nanos = now_nanos() - t0;
  return row;
}

SweepResults run_sweep_impl(const ExperimentConfig& config) {
  std::vector<Task> tasks;
  std::size_t cell_index = 0;
  for (double k : config.k_grid) {
    for (double pf : config.p_fail_grid) {
      for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
        for (int r = 0; r < config.replicates; ++r)
          tasks.push_back({cell_index, ai, k, pf, r});
      }
      // the seed derivation keys on the (k, p_fail) cell, shared across algorithms
      ++cell_index;
    }
  }

  std::vector<SweepRow> rows(tasks.size());
  const int workers = std::max(1, std::min<int>(config.threads, static_cast<int>(tasks.size())));
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t)
      rows[t] = run_task(config, tasks[t], config.algorithms[tasks[t].algo_index].success_threshold);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t t = next.fetch_add(1);
          if (t >= tasks.size()) return;
          rows[t] =
              run_task(config, tasks[t], config.algorithms[tasks[t].algo_index].success_threshold);
        }
      });
    for (auto& th : pool) th.join();
  }

  SweepResults results;
  results.rows = std::move(rows);

  // aggregate per (cell, algorithm)
  for (double k : config.k_grid)
    for (double pf : config.p_fail_grid)
      for (const auto& algo : config.algorithms) {
        std::vector<double> errs;
        std::vector<std::int64_t> times;
        int succ = 0, total = 0;
        for (const auto& row : results.rows)
          if (row.k == k && row.p_fail == pf && row.algorithm == algo.name) {
            ++total;
            succ += row.success ? 1 : 0;
            errs.push_back(row.rel_error);
            times.push_back(row.wall_nanos);
          }
        if (total == 0) continue;
        SweepCell cell;
        cell.k = k;
        cell.p_fail = pf;
        cell.algorithm = algo.name;
        cell.success_rate = static_cast<double>(succ) / total;
        cell.median_rel_error = median_of(errs);
        cell.median_wall_nanos = median_of(times);
        results.cells.push_back(cell);
      }

  if (!config.out_rows.empty() || !config.out_aggregate.empty())
    write_sweep_csv(results, config.out_rows, config.out_aggregate);
  return results;
}

}  // namespace

SweepResults run_sweep(const ExperimentConfig& config) { return run_sweep_impl(config); }

SweepResults bounded_noise_sweep(ExperimentConfig config) {
  if (!(config.gamma > 0.0))
    throw std::invalid_argument("bounded_noise_sweep: gamma must be positive");
  for (auto& algo : config.algorithms) algo.success_threshold = 0.05;
  return run_sweep_impl(config);
}

void write_sweep_csv(const SweepResults& results, const std::string& rows_path,
                     const std::string& aggregate_path) {
  if (!rows_path.empty()) {
    std::ofstream os(rows_path);
    if (!os) throw std::runtime_error("write_sweep_csv: cannot open " + rows_path);
    os << "k,p_fail,algorithm,replicate,seed,success,rel_error,iterations,status,wall_nanos\n";
    os.precision(17);
    for (const auto& r : results.rows)
      os << r.k << ',' << r.p_fail << ',' << r.algorithm << ',' << r.replicate << ',' << r.seed
         << ',' << (r.success ? 1 : 0) << ',' << r.rel_error << ',' << r.iterations << ','
         << r.status << ',' << r.wall_nanos << '\n';
  }
  if (!aggregate_path.empty()) {
    std::ofstream os(aggregate_path);
    if (!os) throw std::runtime_error("write_sweep_csv: cannot open " + aggregate_path);
    os << "k,p_fail,algorithm,success_rate,median_rel_error,median_wall_nanos\n";
    os.precision(17);
    for (const auto& c : results.cells)
      os << c.k << ',' << c.p_fail << ',' << c.algorithm << ',' << c.success_rate << ','
         << c.median_rel_error << ',' << c.median_wall_nanos << '\n';
  }
}

double delta_heuristic(const Instance& instance, double delta0, double xstar_norm_estimate) {
  if (!(delta0 > 0.0)) throw std::invalid_argument("delta_heuristic: delta0 must be positive");
  if (!(xstar_norm_estimate > 0.0))
    throw std::invalid_argument("delta_heuristic: norm estimate must be positive");
  double opnorm;
  if (instance.ensemble.kind() == EnsembleKind::RandomizedHadamard) {
    opnorm = 1.0 / static_cast<double>(instance.n());  // AtA = I exactly
  } else {
    // power iteration on (1/n) AtA
    const std::int64_t p = instance.p();
    Rng rng(instance.seed ^ 0xD317ULL, Stream::Init);
    Vector v(p);
    for (std::int64_t i = 0; i < p; ++i) v[i] = rng.normal();
    v /= v.norm();
    opnorm = 0.0;
    const double inv_n = 1.0 / static_cast<double>(instance.n());
    for (int it = 0; it < 50; ++it) {
      Vector w = inv_n * instance.ensemble.apply_adjoint(instance.ensemble.apply(v));
      double nrm = w.norm();
      if (nrm == 0.0) break;
      opnorm = nrm;
      v = w / nrm;
    }
  }
  return delta0 * opnorm * xstar_norm_estimate * xstar_norm_estimate;
}

ImageRunResult run_image(const ImageTask& task, const std::vector<AlgorithmSpec>& algorithms,
                         std::uint64_t seed, int max_iters) {
  const std::int64_t raw = task.image.size();
  std::int64_t p = 1;
  while (p < raw) p <<= 1;
  if (p > (std::int64_t{1} << 24)) throw std::invalid_argument("run_image: p exceeds 2^24");

  Vector x_star = Vector::Zero(p);
  for (std::int64_t i = 0; i < raw; ++i) x_star[i] = task.image.pixels[static_cast<std::size_t>(i)];
  if (!(x_star.norm() > 0.0)) throw std::invalid_argument("run_image: image is all zero");

  SensingEnsemble ensemble = SensingEnsemble::randomized_hadamard(p, task.k, seed);
  Instance inst = generate_instance(std::move(ensemble), x_star, task.corruption, seed);

  // Normalize the measurement scale so solver tolerances and bandwidths are
  // scale-free: median(b) estimates chi2_1_median * (typical (a^T x*)^2), and
  // the median is robust to the corrupted rows. The recovered signal is
  // rescaled back before unpadding.
  Vector b_sorted = inst.b;
  std::nth_element(b_sorted.data(), b_sorted.data() + b_sorted.size() / 2,
                   b_sorted.data() + b_sorted.size());
  double scale2 = b_sorted[b_sorted.size() / 2] / chi2_1_median();
  if (!(scale2 > 0.0)) scale2 = 1.0;
  const double scale = std::sqrt(scale2);
  inst.b /= scale2;
  Vector x_star_scaled = x_star / scale;
  inst.x_star = x_star_scaled;

  // bandwidth heuristic with the operator-norm factor folded in: delta0 / k
  const double delta = task.delta0 / static_cast<double>(task.k);
  SmoothedLoss loss(KernelKind::PseudoHuberGen, delta);

  ImageRunResult out;
  out.p = p;
  Vector best = Vector::Zero(p);
  for (const auto& algo : algorithms) {
    PipelineConfig pipe;
    pipe.smooth.max_outer_iters = max_iters;
    pipe.smooth.grad_tol = 1e-9;  // phase 1 only needs the vicinity
    pipe.smooth.record_trace = false;
    pipe.use_finisher = algo.finisher;
    pipe.finisher.record_trace = false;
    // The Hadamard rows have norm 1/sqrt(k), so the composite objective is
    // weakly convex with constant 2/k; a proximal parameter well below that
    // takes steps of length ~ sharpness/beta, which matters because the
    // near-threshold image instances have small sharpness margins.
    pipe.finisher.beta = 0.3 / static_cast<double>(task.k);
    pipe.finisher.max_outer = 60;
    // On the normalized scale the signal norm is about sqrt(n); a step-norm
    // stop at 1e-8 of that leaves the final relative error far below the
    // 1e-6 success threshold without demanding duality gaps the dual solver
    // cannot certify at this problem size.
    pipe.finisher.stop_tol =
        1e-8 * std::sqrt(static_cast<double>(p * task.k));

    InitSpec init = algo.init;
    if (init.kind == InitKind::Random) {
      init.random.law = RadiusLaw::Fixed;
      // on the normalized scale the signal norm is about sqrt(n)
      init.random.radius = 0.5 * std::sqrt(static_cast<double>(p * task.k));
    }

    const std::int64_t t0 = now_nanos();
    ImageRunMetrics m;
    m.algorithm = algo.name;
    try {
      SolveResult res = srpr_pipeline(inst, loss, init, pipe, seed);
      m.rel_error = relative_error(res.x_final, x_star_scaled);
      m.success = m.rel_error <= algo.success_threshold;
      m.iterations = res.iterations;
      // undo the normalization and align the sign before unpadding
      Vector rescaled = scale * res.x_final;
      best = (rescaled - x_star).norm() <= (rescaled + x_star).norm() ? rescaled
                                                                     : -rescaled;
    } catch (const std::exception&) {
      m.rel_error = std::numeric_limits<double>::infinity();
      m.success = false;
    }
    m.wall_nanos = now_nanos() - t0;
    out.metrics.push_back(m);
  }

  out.recovered = task.image;
  for (std::int64_t i = 0; i < raw; ++i)
    out.recovered.pixels[static_cast<std::size_t>(i)] = std::clamp(best[i], 0.0, 1.0);
  return out;
}

}  // namespace srpr
