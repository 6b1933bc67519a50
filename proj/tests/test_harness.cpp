#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "srpr/harness.hpp"

using namespace srpr;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.p = 16;
  cfg.k_grid = {8.0};
  cfg.p_fail_grid = {0.0, 0.1};
  cfg.corruption = CorruptionKind::HalfCauchy;
  cfg.kernel = KernelKind::Gaussian;
  cfg.delta = {DeltaPolicyKind::Fixed, 0.25};
  cfg.replicates = 3;
  cfg.seed = 11;
  cfg.max_iters = 2000;
  AlgorithmSpec ri{"srpr-ri", InitSpec{}, false, 1e-6};
  AlgorithmSpec si{"srpr-si", InitSpec{}, true, 1e-6};
  si.init.kind = InitKind::Spectral;
  cfg.algorithms = {ri, si};
  return cfg;
}

}  // namespace

TEST_CASE("replicate_seed separates cells and replicates") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t cell = 0; cell < 8; ++cell)
    for (std::uint64_t rep = 0; rep < 8; ++rep)
      seen.insert(replicate_seed(42, cell, rep));
  CHECK(seen.size() == 64);
  CHECK(replicate_seed(42, 1, 2) == replicate_seed(42, 1, 2));
  CHECK(replicate_seed(42, 1, 2) != replicate_seed(43, 1, 2));
}

TEST_CASE("run_sweep produces a full deterministic grid") {
  auto cfg = small_config();
  auto r1 = run_sweep(cfg);
  auto r2 = run_sweep(cfg);
  // 2 cells x 2 algorithms x 3 replicates
  REQUIRE(r1.rows.size() == 12);
  REQUIRE(r1.cells.size() == 4);
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(r1.rows[i].rel_error == r2.rows[i].rel_error);
    CHECK(r1.rows[i].seed == r2.rows[i].seed);
    CHECK(r1.rows[i].algorithm == r2.rows[i].algorithm);
  }
  // the same (cell, replicate) uses the same instance seed across algorithms
  std::set<std::uint64_t> ri_seeds, si_seeds;
  for (auto& row : r1.rows) {
    if (row.algorithm == "srpr-ri") ri_seeds.insert(row.seed);
    if (row.algorithm == "srpr-si") si_seeds.insert(row.seed);
  }
  CHECK(ri_seeds == si_seeds);
}

TEST_CASE("run_sweep is thread-count invariant") {
  auto cfg = small_config();
  cfg.threads = 1;
  auto serial = run_sweep(cfg);
  cfg.threads = 4;
  auto parallel = run_sweep(cfg);
  REQUIRE(serial.rows.size() == parallel.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].rel_error == parallel.rows[i].rel_error);
    CHECK(serial.rows[i].success == parallel.rows[i].success);
  }
}

TEST_CASE("noiseless cells mostly succeed") {
  auto cfg = small_config();
  cfg.p_fail_grid = {0.0};
  cfg.replicates = 5;
  auto res = run_sweep(cfg);
  for (auto& cell : res.cells) CHECK(cell.success_rate >= 0.8);
}

TEST_CASE("sweep csv output") {
  auto cfg = small_config();
  cfg.replicates = 2;
  auto res = run_sweep(cfg);
  write_sweep_csv(res, "rows_test.csv", "agg_test.csv");
  std::ifstream rows("rows_test.csv");
  std::string line;
  REQUIRE(std::getline(rows, line));
  CHECK(line == "k,p_fail,algorithm,replicate,seed,success,rel_error,iterations,status,wall_nanos");
  int count = 0;
  while (std::getline(rows, line))
    if (!line.empty()) ++count;
  CHECK(count == int(res.rows.size()));
  std::ifstream agg("agg_test.csv");
  REQUIRE(std::getline(agg, line));
  CHECK(line == "k,p_fail,algorithm,success_rate,median_rel_error,median_wall_nanos");
  std::remove("rows_test.csv");
  std::remove("agg_test.csv");
}

TEST_CASE("config_from_json_file round trip") {
  const char* path = "cfg_test.json";
  {
    std::ofstream out(path);
    out << R"({
      "p": 32,
      "k_grid": [6.0, 8.0],
      "p_fail_grid": [0.0, 0.2],
      "corruption": "half-cauchy",
      "kernel": "logistic",
      "delta": {"policy": "heuristic", "value": 0.5},
      "ensemble": "hadamard",
      "replicates": 7,
      "seed": 99,
      "max_iters": 1234,
      "threads": 2,
      "algorithms": [
        {"name": "srpr-ri", "init": "random", "finisher": false, "success_threshold": 1e-5},
        {"name": "srpr-si", "init": "spectral", "finisher": true}
      ]
    })";
  }
  auto cfg = config_from_json_file(path);
  CHECK(cfg.p == 32);
  CHECK(cfg.k_grid == std::vector<double>{6.0, 8.0});
  CHECK(cfg.p_fail_grid == std::vector<double>{0.0, 0.2});
  CHECK(cfg.corruption == CorruptionKind::HalfCauchy);
  CHECK(cfg.kernel == KernelKind::Logistic);
  CHECK(cfg.delta.kind == DeltaPolicyKind::Heuristic);
  CHECK(cfg.delta.value == 0.5);
  CHECK(cfg.ensemble == EnsembleKind::RandomizedHadamard);
  CHECK(cfg.replicates == 7);
  CHECK(cfg.seed == 99);
  CHECK(cfg.max_iters == 1234);
  CHECK(cfg.threads == 2);
  REQUIRE(cfg.algorithms.size() == 2);
  CHECK(cfg.algorithms[0].name == "srpr-ri");
  CHECK(cfg.algorithms[0].init.kind == InitKind::Random);
  CHECK(cfg.algorithms[0].success_threshold == 1e-5);
  CHECK(cfg.algorithms[1].init.kind == InitKind::Spectral);
  CHECK(cfg.algorithms[1].finisher);
  std::remove(path);
}

TEST_CASE("delta_heuristic on the Hadamard ensemble is exact") {
  auto ens = SensingEnsemble::randomized_hadamard(32, 2, 5);
  Vector xs = Vector::Ones(32);
  auto inst = generate_instance(ens, xs, CorruptionSpec{}, 9);
  // ||E_n[a a^T]||_2 = ||(1/n) I|| = 1/n; ||x_star||^2 = 32, n = 64
  CHECK(delta_heuristic(inst, 0.5, xs.norm()) ==
        doctest::Approx(0.5 * (1.0 / 64.0) * 32.0).epsilon(1e-12));
}

TEST_CASE("delta_heuristic on a Gaussian ensemble tracks the covariance norm") {
  auto ens = SensingEnsemble::dense_gaussian(24, 24 * 40, 5);
  Vector xs = Vector::Ones(24);
  auto inst = generate_instance(ens, xs, CorruptionSpec{}, 9);
  // E[a a^T] = I so the operator norm concentrates near 1
  double d = delta_heuristic(inst, 0.25, xs.norm());
  CHECK(d > 0.25 * 24.0 * 0.8);
  CHECK(d < 0.25 * 24.0 * 1.3);
}

TEST_CASE("bounded_noise_sweep requires gamma and relaxes thresholds") {
  auto cfg = small_config();
  cfg.gamma = 0.0;
  CHECK_THROWS(bounded_noise_sweep(cfg));
  cfg.gamma = 0.1;
  cfg.p_fail_grid = {0.0};
  cfg.replicates = 3;
  auto res = bounded_noise_sweep(cfg);
  REQUIRE(!res.cells.empty());
  for (auto& cell : res.cells) CHECK(cell.success_rate >= 2.0 / 3.0);
}

TEST_CASE("ppm round trip") {
  ImageRgb img = synthetic_image(12, 7);
  CHECK(img.width == 12);
  CHECK(img.height == 7);
  write_ppm(img, "img_test.ppm");
  ImageRgb back = read_ppm("img_test.ppm");
  CHECK(back.width == img.width);
  CHECK(back.height == img.height);
  REQUIRE(back.pixels.size() == img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    CHECK(back.pixels[i] == doctest::Approx(img.pixels[i]).epsilon(1e-12));
  std::remove("img_test.ppm");
}

TEST_CASE("read_ppm handles comments and rejects other formats") {
  {
    std::ofstream out("manual_test.ppm", std::ios::binary);
    out << "P6\n# a comment\n2 1\n255\n";
    unsigned char px[6] = {255, 0, 0, 0, 255, 0};
    out.write(reinterpret_cast<char*>(px), 6);
  }
  ImageRgb img = read_ppm("manual_test.ppm");
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.pixels[0] == doctest::Approx(1.0));
  CHECK(img.pixels[1] == doctest::Approx(0.0));
  CHECK(img.pixels[4] == doctest::Approx(1.0));
  std::remove("manual_test.ppm");
  {
    std::ofstream out("bad_test.ppm", std::ios::binary);
    out << "P5\n2 1\n255\n";
  }
  CHECK_THROWS(read_ppm("bad_test.ppm"));
  std::remove("bad_test.ppm");
}

TEST_CASE("run_image recovers a small synthetic image") {
  ImageTask task;
  task.image = synthetic_image(16, 16);  // p = 768, padded to 1024
  task.k = 6;
  task.corruption = CorruptionSpec{0.0, CorruptionKind::Zeroing, 0.0};
  task.delta0 = 0.01;
  AlgorithmSpec si{"srpr-si", InitSpec{}, true, 1e-5};
  si.init.kind = InitKind::Spectral;
  auto res = run_image(task, {si}, 77, 20000);
  REQUIRE(res.metrics.size() == 1);
  CHECK(res.p == 1024);
  CHECK(res.metrics[0].success);
  CHECK(res.recovered.width == 16);
  CHECK(res.recovered.height == 16);
  // pixel-space reconstruction matches
  double err = 0.0;
  for (std::size_t i = 0; i < task.image.pixels.size(); ++i)
    err = std::max(err, std::abs(res.recovered.pixels[i] - task.image.pixels[i]));
  CHECK(err < 1e-3);
}
