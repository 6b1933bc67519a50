#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srpr {

// The five smoothing kernels. PseudoHuberGen is K(x) = 1/(2(x^2+1)^{3/2}),
// whose convolution with |.| is the pseudo-Huber loss sqrt(x^2 + delta^2).
enum class KernelKind {
  Gaussian,
  Logistic,
  Epanechnikov,
  Triangular,
  PseudoHuberGen,
};

KernelKind kernel_from_name(std::string_view name);
std::string kernel_name(KernelKind kind);

// K(x)
double kernel_eval(KernelKind kind, double x);

// integrated kernel \tilde K(x) = \int_{-inf}^x K
double kernel_cdf(KernelKind kind, double x);

// unit-bandwidth smoothed absolute loss l^1(x); l_delta(x) = delta * l^1(x/delta)
double unit_loss(KernelKind kind, double x);

// A kernel choice plus bandwidth delta.
struct SmoothedLoss {
  KernelKind kernel = KernelKind::PseudoHuberGen;
  double delta = 0.25;

  SmoothedLoss() = default;
  SmoothedLoss(KernelKind k, double d) : kernel(k), delta(d) {
    if (!(d > 0.0)) throw std::invalid_argument("SmoothedLoss: delta must be positive");
  }
};

// l_delta(r) = delta * l^1(r / delta)
double loss_eval(const SmoothedLoss& loss, double r);

// l'_delta(r) = 2 \tilde K(r/delta) - 1
double loss_deriv(const SmoothedLoss& loss, double r);

// l''_delta(r) = (2/delta) K(r/delta)
double loss_second_deriv(const SmoothedLoss& loss, double r);

}  // namespace srpr
