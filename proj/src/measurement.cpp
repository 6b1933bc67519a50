#include "srpr/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace srpr {

bool is_power_of_two(std::int64_t p) { return p > 0 && (p & (p - 1)) == 0; }

void fwht_normalized(Vector& x) {
  const auto n = x.size();
  if (!is_power_of_two(n)) throw std::invalid_argument("fwht: length must be a power of two");
  for (Eigen::Index len = 1; len < n; len <<= 1) {
    for (Eigen::Index i = 0; i < n; i += 2 * len) {
      for (Eigen::Index j = i; j < i + len; ++j) {
        double u = x[j];
        double v = x[j + len];
        x[j] = u + v;
        x[j + len] = u - v;
      }
    }
  }
  x *= 1.0 / std::sqrt(static_cast<double>(n));
}

SensingEnsemble SensingEnsemble::dense_gaussian(std::int64_t p, std::int64_t n,
                                                std::uint64_t seed) {
  if (p < 2) throw std::invalid_argument("dense_gaussian: p must be >= 2");
  if (n < 1) throw std::invalid_argument("dense_gaussian: n must be >= 1");
  SensingEnsemble e;
  e.kind_ = EnsembleKind::DenseGaussian;
  e.p_ = p;
  e.n_ = n;
  e.rows_.resize(n, p);
  Rng rng(seed, Stream::Ensemble);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < p; ++j) e.rows_(i, j) = rng.normal();
  return e;
}

SensingEnsemble SensingEnsemble::randomized_hadamard(std::int64_t p, std::int64_t k,
                                                     std::uint64_t seed) {
  if (!is_power_of_two(p)) throw std::invalid_argument("randomized_hadamard: p must be a power of two");
  if (k < 1) throw std::invalid_argument("randomized_hadamard: k must be >= 1");
  Matrix signs(p, k);
  Rng rng(seed, Stream::Ensemble);
  for (std::int64_t j = 0; j < k; ++j)
    for (std::int64_t i = 0; i < p; ++i) signs(i, j) = static_cast<double>(rng.sign());
  return hadamard_with_signs(std::move(signs));
}

SensingEnsemble SensingEnsemble::hadamard_with_signs(Matrix signs) {
  if (!is_power_of_two(signs.rows()))
    throw std::invalid_argument("hadamard_with_signs: p must be a power of two");
  SensingEnsemble e;
  e.kind_ = EnsembleKind::RandomizedHadamard;
  e.p_ = signs.rows();
  e.k_ = signs.cols();
  e.n_ = e.p_ * e.k_;
  e.signs_ = std::move(signs);
  return e;
}

SensingEnsemble SensingEnsemble::dense_from_rows(Matrix rows) {
  if (rows.cols() < 2 || rows.rows() < 1)
    throw std::invalid_argument("dense_from_rows: need n >= 1, p >= 2");
  SensingEnsemble e;
  e.kind_ = EnsembleKind::DenseGaussian;
  e.p_ = rows.cols();
  e.n_ = rows.rows();
  e.rows_ = std::move(rows);
  return e;
}

Vector SensingEnsemble::apply(const Vector& x) const {
  if (x.size() != p_) throw std::invalid_argument("apply: dimension mismatch");
  if (kind_ == EnsembleKind::DenseGaussian) return rows_ * x;
  Vector out(n_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k_));
  Vector tmp(p_);
  for (std::int64_t j = 0; j < k_; ++j) {
    tmp = signs_.col(j).cwiseProduct(x);
    fwht_normalized(tmp);
    out.segment(j * p_, p_) = scale * tmp;
  }
  return out;
}

Vector SensingEnsemble::apply_adjoint(const Vector& v) const {
  if (v.size() != n_) throw std::invalid_argument("apply_adjoint: dimension mismatch");
  if (kind_ == EnsembleKind::DenseGaussian) return rows_.transpose() * v;
  Vector out = Vector::Zero(p_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k_));
  Vector tmp(p_);
  for (std::int64_t j = 0; j < k_; ++j) {
    tmp = v.segment(j * p_, p_);
    fwht_normalized(tmp);  // H is symmetric
    out += scale * signs_.col(j).cwiseProduct(tmp);
  }
  return out;
}

double SensingEnsemble::row_squared_norm(std::int64_t i) const {
  if (kind_ == EnsembleKind::DenseGaussian) return rows_.row(i).squaredNorm();
  // Hadamard rows have entries +-1/sqrt(p), scaled by 1/sqrt(k)
  return 1.0 / static_cast<double>(k_);
}

Matrix SensingEnsemble::dense() const {
  if (kind_ == EnsembleKind::DenseGaussian) return rows_;
  Matrix A(n_, p_);
  Vector e = Vector::Zero(p_);
  for (std::int64_t j = 0; j < p_; ++j) {
    e[j] = 1.0;
    A.col(j) = apply(e);
    e[j] = 0.0;
  }
  return A;
}

Instance generate_instance(SensingEnsemble ensemble, const Vector& x_star,
                           const CorruptionSpec& corruption, std::uint64_t seed) {
  if (x_star.size() != ensemble.cols())
    throw std::invalid_argument("generate_instance: x_star dimension mismatch");
  if (!(x_star.norm() > 0.0)) throw std::invalid_argument("generate_instance: x_star must be nonzero");
  if (!(corruption.p_fail >= 0.0 && corruption.p_fail < 1.0))
    throw std::invalid_argument("generate_instance: p_fail must be in [0, 1)");
  if (corruption.gamma < 0.0) throw std::invalid_argument("generate_instance: gamma must be >= 0");

  const std::int64_t n = ensemble.rows();
  Vector clean = ensemble.apply(x_star);
  Vector b = clean.array().square();

  // median of all clean (a_i^T x_star)^2, before corruption
  double med;
  {
    std::vector<double> v(b.data(), b.data() + n);
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    med = v[n / 2];
    if (n % 2 == 0) {
      double lo = *std::max_element(v.begin(), v.begin() + n / 2);
      med = 0.5 * (med + lo);
    }
  }

  Rng rng(seed, Stream::Corruption);

  const auto n2 = static_cast<std::int64_t>(std::llround(corruption.p_fail * static_cast<double>(n)));
  std::vector<std::int64_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates: first n2 entries are the outlier positions
  for (std::int64_t i = 0; i < n2; ++i) {
    std::int64_t j = i + static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }

  std::vector<std::uint8_t> mask(n, 1);
  for (std::int64_t i = 0; i < n2; ++i) {
    std::int64_t pos = idx[i];
    mask[pos] = 0;
    if (corruption.kind == CorruptionKind::Zeroing) {
      b[pos] = 0.0;
    } else {
      double u = rng.uniform_open();
      b[pos] = std::tan(M_PI_2 * u) * med;
    }
  }
  if (corruption.gamma > 0.0) {
    for (std::int64_t i = 0; i < n; ++i)
      if (mask[i]) b[i] += rng.uniform(-corruption.gamma, corruption.gamma);
  }

  Instance inst;
  inst.ensemble = std::move(ensemble);
  inst.b = std::move(b);
  inst.x_star = x_star;
  inst.inlier_mask = std::move(mask);
  inst.corruption = corruption;
  inst.seed = seed;
  return inst;
}

namespace {

constexpr char kMagic[5] = {'S', 'R', 'P', 'R', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("load_instance: truncated file");
  return v;
}

}  // namespace

void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_instance: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::int64_t>(os, inst.p());
  write_pod<std::int64_t>(os, inst.n());
  write_pod<std::uint8_t>(os, inst.ensemble.kind() == EnsembleKind::DenseGaussian ? 0 : 1);
  if (inst.ensemble.kind() == EnsembleKind::DenseGaussian) {
    const Matrix& rows = inst.ensemble.dense_rows();
    for (std::int64_t i = 0; i < inst.n(); ++i)
      for (std::int64_t j = 0; j < inst.p(); ++j) write_pod<double>(os, rows(i, j));
  } else {
    write_pod<std::int64_t>(os, inst.ensemble.hadamard_blocks());
    const Matrix& signs = inst.ensemble.sign_diagonals();
    for (std::int64_t j = 0; j < signs.cols(); ++j)
      for (std::int64_t i = 0; i < signs.rows(); ++i)
        write_pod<std::int8_t>(os, signs(i, j) > 0 ? 1 : -1);
  }
  os.write(reinterpret_cast<const char*>(inst.b.data()),
           static_cast<std::streamsize>(sizeof(double) * inst.n()));
  write_pod<std::uint8_t>(os, inst.x_star.has_value() ? 1 : 0);
  if (inst.x_star)
    os.write(reinterpret_cast<const char*>(inst.x_star->data()),
             static_cast<std::streamsize>(sizeof(double) * inst.p()));
  write_pod<std::uint8_t>(os, inst.inlier_mask.has_value() ? 1 : 0);
  if (inst.inlier_mask)
    os.write(reinterpret_cast<const char*>(inst.inlier_mask->data()),
             static_cast<std::streamsize>(inst.n()));
  write_pod<double>(os, inst.corruption.p_fail);
  write_pod<std::uint8_t>(os, inst.corruption.kind == CorruptionKind::Zeroing ? 0 : 1);
  write_pod<double>(os, inst.corruption.gamma);
  write_pod<std::uint64_t>(os, inst.seed);
  if (!os) throw std::runtime_error("save_instance: write failed for " + path);

  nlohmann::json meta;
  meta["format"] = "SRPR1";
  meta["p"] = inst.p();
  meta["n"] = inst.n();
  meta["ensemble"] =
      inst.ensemble.kind() == EnsembleKind::DenseGaussian ? "gaussian" : "hadamard";
  if (inst.ensemble.kind() == EnsembleKind::RandomizedHadamard)
    meta["k"] = inst.ensemble.hadamard_blocks();
  meta["p_fail"] = inst.corruption.p_fail;
  meta["corruption"] = inst.corruption.kind == CorruptionKind::Zeroing ? "zero" : "cauchy";
  meta["gamma"] = inst.corruption.gamma;
  meta["seed"] = inst.seed;
  meta["has_x_star"] = inst.x_star.has_value();
  std::ofstream js(path + ".json");
  js << meta.dump(2) << "\n";
}

Instance load_instance(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_instance: cannot open " + path);
  char magic[5];
  is.read(magic, 5);
  if (!is || !std::equal(magic, magic + 5, kMagic))
    throw std::runtime_error("load_instance: bad magic in " + path);
  auto p = read_pod<std::int64_t>(is);
  auto n = read_pod<std::int64_t>(is);
  auto tag = read_pod<std::uint8_t>(is);
  Instance inst;
  if (tag == 0) {
    Matrix rows(n, p);
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < p; ++j) rows(i, j) = read_pod<double>(is);
    inst.ensemble = SensingEnsemble::dense_from_rows(std::move(rows));
  } else {
    auto k = read_pod<std::int64_t>(is);
    Matrix signs(p, k);
    for (std::int64_t j = 0; j < k; ++j)
      for (std::int64_t i = 0; i < p; ++i)
        signs(i, j) = static_cast<double>(read_pod<std::int8_t>(is));
    inst.ensemble = SensingEnsemble::hadamard_with_signs(std::move(signs));
  }
  inst.b.resize(n);
  is.read(reinterpret_cast<char*>(inst.b.data()),
          static_cast<std::streamsize>(sizeof(double) * n));
  if (read_pod<std::uint8_t>(is)) {
    Vector xs(p);
    is.read(reinterpret_cast<char*>(xs.data()),
            static_cast<std::streamsize>(sizeof(double) * p));
    inst.x_star = std::move(xs);
  }
  if (read_pod<std::uint8_t>(is)) {
    std::vector<std::uint8_t> mask(n);
    is.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(n));
    inst.inlier_mask = std::move(mask);
  }
  inst.corruption.p_fail = read_pod<double>(is);
  inst.corruption.kind =
      read_pod<std::uint8_t>(is) == 0 ? CorruptionKind::Zeroing : CorruptionKind::HalfCauchy;
  inst.corruption.gamma = read_pod<double>(is);
  inst.seed = read_pod<std::uint64_t>(is);
  if (!is) throw std::runtime_error("load_instance: truncated file " + path);
  return inst;
}

}  // namespace srpr
