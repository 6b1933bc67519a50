#pragma once

#include <optional>
#include <string>
#include <vector>

#include "srpr/landscape.hpp"
#include "srpr/ppm.hpp"
#include "srpr/solvers.hpp"

namespace srpr {

enum class DeltaPolicyKind { Fixed, Heuristic };

struct DeltaPolicy {
  DeltaPolicyKind kind = DeltaPolicyKind::Fixed;
  double value = 0.25;   // Fixed: delta; Heuristic: delta0
};

struct AlgorithmSpec {
  std::string name;               // e.g. "srpr-ri", "srpr-si"
  InitSpec init;
  bool finisher = false;
  double success_threshold = 1e-6;
};

struct ExperimentConfig {
  std::int64_t p = 128;
  std::vector<double> k_grid = {8.0};       // n = round(k * p)
  std::vector<double> p_fail_grid = {0.0};
  CorruptionKind corruption = CorruptionKind::HalfCauchy;
  double gamma = 0.0;
  KernelKind kernel = KernelKind::PseudoHuberGen;
  DeltaPolicy delta;
  EnsembleKind ensemble = EnsembleKind::DenseGaussian;
  std::vector<AlgorithmSpec> algorithms;
  int replicates = 10;
  std::uint64_t seed = 1;
  int max_iters = 5000;
  double grad_tol = 1e-14;
  int threads = 1;
  std::string out_rows;       // per-replicate CSV path ("" = skip)
  std::string out_aggregate;  // aggregated CSV path ("" = skip)
};

ExperimentConfig config_from_json_file(const std::string& path);

struct SweepRow {
  double k = 0.0;
  double p_fail = 0.0;
  std::string algorithm;
  int replicate = 0;
  std::uint64_t seed = 0;
  bool success = false;
  double rel_error = 0.0;
  int iterations = 0;
  std::string status;
  std::int64_t wall_nanos = 0;
};

struct SweepCell {
  double k = 0.0;
  double p_fail = 0.0;
  std::string algorithm;
  double success_rate = 0.0;
  double median_rel_error = 0.0;
  std::int64_t median_wall_nanos = 0;
};

struct SweepResults {
  std::vector<SweepRow> rows;     // canonical order: cell-major, replicate-minor
  std::vector<SweepCell> cells;
};

// per-cell seeds are hash(master seed, cell index, replicate index)
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t cell_index,
                             std::uint64_t replicate);

SweepResults run_sweep(const ExperimentConfig& config);

// same protocol with gamma > 0 and the 0.05 success threshold; the finisher's
// stopping tolerance is relaxed to the noise floor
SweepResults bounded_noise_sweep(ExperimentConfig config);

void write_sweep_csv(const SweepResults& results, const std::string& rows_path,
                     const std::string& aggregate_path);

// delta = delta0 * ||E_n[a a^T]||_2 * ||x_star||^2; exact 1/n operator norm on
// the Hadamard path, power-iteration estimate for dense ensembles
double delta_heuristic(const Instance& instance, double delta0, double xstar_norm_estimate);

struct ImageTask {
  ImageRgb image;
  std::int64_t k = 6;
  CorruptionSpec corruption;
  double delta0 = 0.01;
};

struct ImageRunMetrics {
  std::string algorithm;
  double rel_error = 0.0;
  bool success = false;
  int iterations = 0;
  std::int64_t wall_nanos = 0;
};

struct ImageRunResult {
  ImageRgb recovered;            // from the last algorithm run
  std::vector<ImageRunMetrics> metrics;
  std::int64_t p = 0;            // padded signal length
};

ImageRunResult run_image(const ImageTask& task, const std::vector<AlgorithmSpec>& algorithms,
                         std::uint64_t seed, int max_iters = 20000);

}  // namespace srpr
