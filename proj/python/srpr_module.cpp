#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srpr/harness.hpp"

namespace py = pybind11;
using namespace srpr;

namespace {

CorruptionKind corruption_from_name(const std::string& name) {
  if (name == "zero" || name == "zeroing") return CorruptionKind::Zeroing;
  if (name == "half-cauchy" || name == "cauchy") return CorruptionKind::HalfCauchy;
  throw std::invalid_argument("unknown corruption: " + name);
}

Instance make_gaussian(std::int64_t p, std::int64_t n, std::uint64_t seed,
                       double p_fail, const std::string& corruption, double gamma) {
  auto ens = SensingEnsemble::dense_gaussian(p, n, seed);
  Rng rng(seed, Stream::Init);
  Vector xs(p);
  for (std::int64_t i = 0; i < p; ++i) xs[i] = static_cast<double>(rng.sign());
  return generate_instance(std::move(ens), xs,
                           {p_fail, corruption_from_name(corruption), gamma}, seed);
}

Instance make_hadamard(std::int64_t p, std::int64_t k, std::uint64_t seed,
                       double p_fail, const std::string& corruption, double gamma) {
  auto ens = SensingEnsemble::randomized_hadamard(p, k, seed);
  Rng rng(seed, Stream::Init);
  Vector xs(p);
  for (std::int64_t i = 0; i < p; ++i) xs[i] = static_cast<double>(rng.sign());
  return generate_instance(std::move(ens), xs,
                           {p_fail, corruption_from_name(corruption), gamma}, seed);
}

py::dict solve_instance(const Instance& inst, const std::string& algo, double delta,
                        const std::string& kernel, const std::string& init_kind,
                        bool finisher, std::uint64_t seed, int max_iters) {
  SmoothedLoss loss(kernel_from_name(kernel), delta);
  InitSpec init;
  init.kind = init_kind == "spectral" ? InitKind::Spectral : InitKind::Random;
  SolveResult res;
  if (algo == "mapg") {
    ObjectiveContext ctx(inst, loss);
    SolveConfig cfg;
    cfg.max_outer_iters = max_iters;
    res = mapg(ctx, make_init(inst, init, seed), cfg);
  } else if (algo == "ipl") {
    IplConfig cfg;
    cfg.max_outer = max_iters;
    res = ipl(inst, make_init(inst, init, seed), cfg);
  } else if (algo == "pipeline") {
    PipelineConfig cfg;
    cfg.smooth.max_outer_iters = max_iters;
    cfg.use_finisher = finisher;
    res = srpr_pipeline(inst, loss, init, cfg, seed);
  } else {
    throw std::invalid_argument("unknown algo: " + algo);
  }
  py::dict out;
  out["x"] = res.x_final;
  out["status"] = status_name(res.status);
  out["iterations"] = res.iterations;
  if (inst.x_star) out["rel_error"] = relative_error(res.x_final, *inst.x_star);
  return out;
}

}  // namespace

PYBIND11_MODULE(_srpr, m) {
  m.doc() = "smoothed robust phase retrieval core bindings";

  py::class_<Instance>(m, "Instance")
      .def_property_readonly("n", &Instance::n)
      .def_property_readonly("p", &Instance::p)
      .def_property_readonly("b", [](const Instance& inst) { return inst.b; })
      .def_property_readonly("x_star", [](const Instance& inst) -> py::object {
        if (!inst.x_star) return py::none();
        return py::cast(*inst.x_star);
      });

  m.def("gaussian_instance", &make_gaussian, py::arg("p"), py::arg("n"),
        py::arg("seed") = 1, py::arg("p_fail") = 0.0,
        py::arg("corruption") = "zero", py::arg("gamma") = 0.0,
        "generate a dense Gaussian sensing instance with a +-1 ground truth");
  m.def("hadamard_instance", &make_hadamard, py::arg("p"), py::arg("k"),
        py::arg("seed") = 1, py::arg("p_fail") = 0.0,
        py::arg("corruption") = "zero", py::arg("gamma") = 0.0,
        "generate a randomized Hadamard sensing instance (n = k * p)");
  m.def("load_instance", &load_instance, py::arg("path"));
  m.def("save_instance", &save_instance, py::arg("instance"), py::arg("path"));

  m.def("solve", &solve_instance, py::arg("instance"), py::arg("algo") = "pipeline",
        py::arg("delta") = 0.25, py::arg("kernel") = "pseudo-huber",
        py::arg("init") = "random", py::arg("finisher") = false, py::arg("seed") = 1,
        py::arg("max_iters") = 10000,
        "run a solver on an instance; returns x, status, iterations, rel_error");

  m.def("relative_error", &relative_error, py::arg("x"), py::arg("x_star"),
        "sign-invariant relative distance to the ground truth");
  m.def(
      "fwht",
      [](Vector x) {
        fwht_normalized(x);
        return x;
      },
      py::arg("x"), "orthonormal fast Walsh-Hadamard transform (length 2^s)");

  m.def("u0_limit", &u0_limit, "limiting stationary-ring radius as delta -> 0");
  m.def("limiting_u2", &limiting_u2, py::arg("u"),
        "limiting truth-direction curvature on the orthogonal circle of radius u");
  m.def(
      "solve_u_delta",
      [](const std::string& kernel, double delta) {
        return PopulationProbe(SmoothedLoss(kernel_from_name(kernel), delta)).solve_u_delta();
      },
      py::arg("kernel"), py::arg("delta"),
      "stationary-ring radius of the population objective at bandwidth delta");
}
