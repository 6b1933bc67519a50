#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "srpr/harness.hpp"

using namespace srpr;

namespace {

void write_trace_csv(const SolveResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  out << "iter,phase,objective,grad_norm,rel_error,wall_nanos\n";
  for (const auto& row : res.trace)
    out << row.iter << ',' << row.phase << ',' << row.objective << ','
        << row.grad_norm << ',' << row.rel_error << ',' << row.wall_nanos
        << '\n';
}

CorruptionKind corruption_from_name(const std::string& name) {
  if (name == "zero" || name == "zeroing") return CorruptionKind::Zeroing;
  if (name == "half-cauchy" || name == "cauchy") return CorruptionKind::HalfCauchy;
  throw CLI::ValidationError("--corruption", "unknown corruption: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smoothed robust phase retrieval toolkit"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a measurement instance file");
  struct {
    std::int64_t p = 128, n = 1024, k = 8;
    std::string ensemble = "gaussian", corruption = "zero", out;
    double pfail = 0.0, gamma = 0.0;
    std::uint64_t seed = 1;
  } g;
  gen->add_option("--p", g.p, "signal dimension");
  gen->add_option("--n", g.n, "measurement count (gaussian ensemble)");
  gen->add_option("--k", g.k, "block count (hadamard ensemble, n = k*p)");
  gen->add_option("--ensemble", g.ensemble, "gaussian|hadamard");
  gen->add_option("--corruption", g.corruption, "zero|half-cauchy");
  gen->add_option("--pfail", g.pfail, "corrupted fraction");
  gen->add_option("--gamma", g.gamma, "inlier noise bound");
  gen->add_option("--seed", g.seed, "seed");
  gen->add_option("--out", g.out, "output instance path")->required();

  // ---- solve ----
  auto* solve = app.add_subcommand("solve", "solve a saved instance");
  struct {
    std::string instance, algo = "pipeline", kernel = "pseudo-huber";
    std::string init = "random", trace;
    double delta = 0.25, init_quantile = 0.5;
    bool finisher = false;
    std::uint64_t seed = 1;
    int max_iters = 10000;
  } s;
  solve->add_option("--instance", s.instance, "instance file")->required();
  solve->add_option("--algo", s.algo, "gd|mapg|ipl|pipeline");
  solve->add_option("--delta", s.delta, "smoothing bandwidth");
  solve->add_option("--kernel", s.kernel, "kernel name");
  solve->add_option("--init", s.init, "random|spectral");
  solve->add_option("--init-quantile", s.init_quantile, "spectral selection quantile");
  solve->add_flag("--finisher", s.finisher, "run the prox-linear finisher");
  solve->add_option("--seed", s.seed, "seed");
  solve->add_option("--max-iters", s.max_iters, "iteration cap");
  solve->add_option("--trace", s.trace, "per-iteration trace CSV path");

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "run a seeded experiment sweep");
  struct {
    std::string config;
    bool bounded_noise = false;
  } w;
  sweep->add_option("--config", w.config, "JSON config file")->required();
  sweep->add_flag("--bounded-noise", w.bounded_noise, "bounded inlier-noise protocol");

  // ---- image ----
  auto* image = app.add_subcommand("image", "phase retrieval on a PPM image");
  struct {
    std::string input, output = "recovered.ppm", corruption = "zero", init = "spectral";
    std::int64_t k = 6;
    double pfail = 0.2, delta0 = 0.01;
    bool finisher = false;
    std::uint64_t seed = 1;
    int max_iters = 20000;
  } im;
  image->add_option("--input", im.input, "input PPM (P6)")->required();
  image->add_option("--output", im.output, "recovered PPM path");
  image->add_option("--k", im.k, "Hadamard block count");
  image->add_option("--pfail", im.pfail, "corrupted fraction");
  image->add_option("--corruption", im.corruption, "zero|half-cauchy");
  image->add_option("--delta0", im.delta0, "base bandwidth (delta = delta0 / k)");
  image->add_option("--init", im.init, "random|spectral");
  image->add_flag("--finisher", im.finisher, "run the prox-linear finisher");
  image->add_option("--seed", im.seed, "seed");
  image->add_option("--max-iters", im.max_iters, "iteration cap");

  // ---- synth-image ----
  auto* synth = app.add_subcommand("synth-image", "write a synthetic test PPM");
  struct {
    std::int64_t width = 73, height = 74;
    std::string out = "synthetic.ppm";
  } sy;
  synth->add_option("--width", sy.width, "width");
  synth->add_option("--height", sy.height, "height");
  synth->add_option("--out", sy.out, "output PPM path");

  // ---- landscape ----
  auto* land = app.add_subcommand("landscape", "landscape probes");
  struct {
    std::string mode = "population", kernel = "pseudo-huber", out = "landscape.csv";
    std::string instance;
    double delta = 0.05, u_min = -1.5, u_max = 1.5, v_min = 0.0, v_max = 1.5;
    int u_steps = 25, v_steps = 13;
  } l;
  land->add_option("mode", l.mode, "population|empirical|u-delta")->required();
  land->add_option("--kernel", l.kernel, "kernel name");
  land->add_option("--delta", l.delta, "smoothing bandwidth");
  land->add_option("--instance", l.instance, "instance file (empirical mode)");
  land->add_option("--out", l.out, "output CSV path");
  land->add_option("--u-min", l.u_min, "grid start along the signal axis");
  land->add_option("--u-max", l.u_max, "grid end along the signal axis");
  land->add_option("--v-min", l.v_min, "grid start along the orthogonal axis");
  land->add_option("--v-max", l.v_max, "grid end along the orthogonal axis");
  land->add_option("--u-steps", l.u_steps, "grid points along the signal axis");
  land->add_option("--v-steps", l.v_steps, "grid points along the orthogonal axis");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      SensingEnsemble ens =
          g.ensemble == "hadamard"
              ? SensingEnsemble::randomized_hadamard(g.p, g.k, g.seed)
              : SensingEnsemble::dense_gaussian(g.p, g.n, g.seed);
      Rng rng(g.seed, Stream::Init);
      Vector xs(ens.cols());
      for (std::int64_t i = 0; i < ens.cols(); ++i)
        xs[i] = static_cast<double>(rng.sign());
      CorruptionSpec corruption{g.pfail, corruption_from_name(g.corruption), g.gamma};
      Instance inst = generate_instance(std::move(ens), xs, corruption, g.seed);
      save_instance(inst, g.out);
      std::cout << "wrote " << g.out << " (p=" << inst.p() << ", n=" << inst.n()
                << ")\n";
    } else if (*solve) {
      Instance inst = load_instance(s.instance);
      SmoothedLoss loss(kernel_from_name(s.kernel), s.delta);
      InitSpec init;
      init.kind = s.init == "spectral" ? InitKind::Spectral : InitKind::Random;
      init.spectral.quantile = s.init_quantile;
      SolveResult res;
      if (s.algo == "gd") {
        ObjectiveContext ctx(inst, loss);
        SolveConfig cfg;
        cfg.max_outer_iters = s.max_iters;
        cfg.fixed_step = estimate_step(ctx, 20, s.seed);
        res = gd_fixed(ctx, make_init(inst, init, s.seed), cfg);
      } else if (s.algo == "mapg") {
        ObjectiveContext ctx(inst, loss);
        SolveConfig cfg;
        cfg.max_outer_iters = s.max_iters;
        res = mapg(ctx, make_init(inst, init, s.seed), cfg);
      } else if (s.algo == "ipl") {
        IplConfig cfg;
        cfg.max_outer = s.max_iters;
        res = ipl(inst, make_init(inst, init, s.seed), cfg);
      } else if (s.algo == "pipeline") {
        PipelineConfig cfg;
        cfg.smooth.max_outer_iters = s.max_iters;
        cfg.use_finisher = s.finisher;
        res = srpr_pipeline(inst, loss, init, cfg, s.seed);
      } else {
        throw std::runtime_error("unknown --algo: " + s.algo);
      }
      std::cout << "status: " << status_name(res.status)
                << "  iterations: " << res.iterations;
      if (inst.x_star)
        std::cout << "  rel_error: " << relative_error(res.x_final, *inst.x_star);
      std::cout << '\n';
      if (!s.trace.empty()) write_trace_csv(res, s.trace);
    } else if (*sweep) {
      ExperimentConfig cfg = config_from_json_file(w.config);
      SweepResults results =
          w.bounded_noise ? bounded_noise_sweep(cfg) : run_sweep(cfg);
      if (!cfg.out_rows.empty() || !cfg.out_aggregate.empty())
        write_sweep_csv(results, cfg.out_rows, cfg.out_aggregate);
      for (const auto& cell : results.cells)
        std::cout << cell.algorithm << " k=" << cell.k << " pfail=" << cell.p_fail
                  << " success_rate=" << cell.success_rate
                  << " median_rel_error=" << cell.median_rel_error << '\n';
    } else if (*image) {
      ImageTask task;
      task.image = read_ppm(im.input);
      task.k = im.k;
      task.corruption = CorruptionSpec{im.pfail, corruption_from_name(im.corruption), 0.0};
      task.delta0 = im.delta0;
      AlgorithmSpec algo;
      algo.name = im.init == "spectral" ? "srpr-si" : "srpr-ri";
      algo.init.kind = im.init == "spectral" ? InitKind::Spectral : InitKind::Random;
      algo.finisher = im.finisher;
      auto res = run_image(task, {algo}, im.seed, im.max_iters);
      for (const auto& m : res.metrics)
        std::cout << m.algorithm << " rel_error=" << m.rel_error
                  << " success=" << (m.success ? "yes" : "no")
                  << " iterations=" << m.iterations << '\n';
      write_ppm(res.recovered, im.output);
      std::cout << "wrote " << im.output << '\n';
    } else if (*synth) {
      write_ppm(synthetic_image(sy.width, sy.height), sy.out);
      std::cout << "wrote " << sy.out << '\n';
    } else if (*land) {
      if (l.mode == "u-delta") {
        PopulationProbe probe(SmoothedLoss(kernel_from_name(l.kernel), l.delta));
        std::cout << "u_delta=" << probe.solve_u_delta()
                  << " u0=" << u0_limit()
                  << " limiting_u2=" << limiting_u2(u0_limit()) << '\n';
      } else if (l.mode == "population") {
        PopulationProbe probe(SmoothedLoss(kernel_from_name(l.kernel), l.delta));
        std::ofstream out(l.out);
        out << "u,v,f_delta,grad_norm,u1,u2,u3\n";
        for (int i = 0; i < l.u_steps; ++i) {
          double u = l.u_min + (l.u_max - l.u_min) * i / std::max(1, l.u_steps - 1);
          for (int j = 0; j < l.v_steps; ++j) {
            double v = l.v_min + (l.v_max - l.v_min) * j / std::max(1, l.v_steps - 1);
            double u1 = probe.u1(u, v), u2 = probe.u2(u, v), u3 = probe.u3(u, v);
            out << u << ',' << v << ",," << ',' << u1 << ',' << u2 << ',' << u3
                << '\n';
          }
        }
        std::cout << "wrote " << l.out << '\n';
      } else if (l.mode == "empirical") {
        if (l.instance.empty())
          throw std::runtime_error("empirical mode needs --instance");
        Instance inst = load_instance(l.instance);
        SmoothedLoss loss(kernel_from_name(l.kernel), l.delta);
        std::vector<double> u_axis, v_axis;
        for (int i = 0; i < l.u_steps; ++i)
          u_axis.push_back(l.u_min + (l.u_max - l.u_min) * i / std::max(1, l.u_steps - 1));
        for (int j = 0; j < l.v_steps; ++j)
          v_axis.push_back(l.v_min + (l.v_max - l.v_min) * j / std::max(1, l.v_steps - 1));
        write_grid_csv(empirical_scan(inst, loss, u_axis, v_axis), l.out);
        std::cout << "wrote " << l.out << '\n';
      } else {
        throw std::runtime_error("unknown landscape mode: " + l.mode);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
