#pragma once

#include <cstdint>

#include "srpr/measurement.hpp"

namespace srpr {

enum class RadiusLaw { UniformScaled, Fixed };

struct RandomSphereSpec {
  RadiusLaw law = RadiusLaw::UniformScaled;
  double radius = 4.0;  // UniformScaled: norm ~ U[0, radius]; Fixed: norm = radius
};

struct SpectralSpec {
  double quantile = 0.5;    // keep rows with b_i below this quantile
  int power_iters = 500;
};

// x0 = r * (direction uniform on the unit sphere)
Vector random_init(const RandomSphereSpec& spec, std::int64_t p, std::uint64_t seed);

// median of the chi-squared distribution with 1 degree of freedom,
// root of erf(sqrt(m/2)) = 1/2
double chi2_1_median();

// Modified spectral initialization: direction is the eigenvector of the
// smallest eigenvalue of mean{a_i a_i^T : b_i below the quantile} (small b_i
// means a_i is nearly orthogonal to x_star), scale sqrt(median(b)/m0).
Vector spectral_init(const Instance& instance, const SpectralSpec& spec);

}  // namespace srpr
