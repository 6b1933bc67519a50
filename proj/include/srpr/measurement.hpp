#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srpr/rng.hpp"

namespace srpr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Normalized fast Walsh-Hadamard transform, in place. The transform is its
// own inverse and preserves the 2-norm. Length must be a power of two.
void fwht_normalized(Vector& x);

bool is_power_of_two(std::int64_t p);

enum class EnsembleKind { DenseGaussian, RandomizedHadamard };

// Sensing matrix A: either dense iid N(0,1) rows, or the randomized Hadamard
// ensemble (1/sqrt(k))[H_p S_1; ...; H_p S_k] with AtA = I_p.
class SensingEnsemble {
 public:
  static SensingEnsemble dense_gaussian(std::int64_t p, std::int64_t n, std::uint64_t seed);
  static SensingEnsemble randomized_hadamard(std::int64_t p, std::int64_t k, std::uint64_t seed);
  // Hadamard ensemble with caller-provided sign diagonals (signs is p x k, entries +-1).
  static SensingEnsemble hadamard_with_signs(Matrix signs);
  // Dense ensemble from explicit rows (file reload path).
  static SensingEnsemble dense_from_rows(Matrix rows);

  EnsembleKind kind() const { return kind_; }
  std::int64_t rows() const { return n_; }
  std::int64_t cols() const { return p_; }
  std::int64_t hadamard_blocks() const { return k_; }

  // Ax (O(n log p) on the Hadamard path)
  Vector apply(const Vector& x) const;
  // At v
  Vector apply_adjoint(const Vector& v) const;

  // squared 2-norm of row i
  double row_squared_norm(std::int64_t i) const;

  // Materialize A as a dense matrix (small p only; test/diagnostic use).
  Matrix dense() const;

  const Matrix& dense_rows() const { return rows_; }
  const Matrix& sign_diagonals() const { return signs_; }

  SensingEnsemble() = default;

 private:
  EnsembleKind kind_ = EnsembleKind::DenseGaussian;
  std::int64_t p_ = 0;
  std::int64_t n_ = 0;
  std::int64_t k_ = 0;  // Hadamard block count
  Matrix rows_;         // dense: n x p
  Matrix signs_;        // Hadamard: p x k, entries +-1
};

enum class CorruptionKind { Zeroing, HalfCauchy };

struct CorruptionSpec {
  double p_fail = 0.0;                          // fraction of corrupted measurements
  CorruptionKind kind = CorruptionKind::Zeroing;
  double gamma = 0.0;                           // inlier noise bound; tau_i ~ U(-gamma, gamma)
};

// A sensing ensemble plus measurements, with optional ground truth and the
// inlier mask recorded for evaluation only.
struct Instance {
  SensingEnsemble ensemble;
  Vector b;
  std::optional<Vector> x_star;
  std::optional<std::vector<std::uint8_t>> inlier_mask;  // 1 = inlier
  CorruptionSpec corruption;
  std::uint64_t seed = 0;

  std::int64_t n() const { return ensemble.rows(); }
  std::int64_t p() const { return ensemble.cols(); }
};

// b_i = (a_i^T x_star)^2 + tau_i for inliers; outliers (round(p_fail * n) of
// them, positions uniform without replacement) are zeroed or drawn from the
// half-Cauchy law scaled by the median clean measurement.
Instance generate_instance(SensingEnsemble ensemble, const Vector& x_star,
                           const CorruptionSpec& corruption, std::uint64_t seed);

// Flat binary container (magic "SRPR1", little-endian) plus a JSON sidecar
// at path + ".json".
void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

}  // namespace srpr
