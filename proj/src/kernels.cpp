#include "srpr/kernels.hpp"

#include <cmath>

namespace srpr {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343;
constexpr double kSqrt2OverPi = 0.7978845608028653558798921198687;

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

}  // namespace

KernelKind kernel_from_name(std::string_view name) {
  if (name == "gaussian") return KernelKind::Gaussian;
  if (name == "logistic") return KernelKind::Logistic;
  if (name == "epanechnikov") return KernelKind::Epanechnikov;
  if (name == "triangular") return KernelKind::Triangular;
  if (name == "pseudo-huber") return KernelKind::PseudoHuberGen;
  throw std::invalid_argument("unknown kernel name: " + std::string(name));
}

std::string kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Logistic: return "logistic";
    case KernelKind::Epanechnikov: return "epanechnikov";
    case KernelKind::Triangular: return "triangular";
    case KernelKind::PseudoHuberGen: return "pseudo-huber";
  }
  throw std::invalid_argument("bad KernelKind");
}

double kernel_eval(KernelKind kind, double x) {
  switch (kind) {
    case KernelKind::Gaussian:
      return std_normal_pdf(x);
    case KernelKind::Logistic: {
      // e^{-|x|}/(1+e^{-|x|})^2, evaluated with the decaying exponential
      double e = std::exp(-std::abs(x));
      double d = 1.0 + e;
      return e / (d * d);
    }
    case KernelKind::Epanechnikov:
      return std::abs(x) <= 1.0 ? 0.75 * (1.0 - x * x) : 0.0;
    case KernelKind::Triangular:
      return std::abs(x) <= 1.0 ? 1.0 - std::abs(x) : 0.0;
    case KernelKind::PseudoHuberGen: {
      double t = x * x + 1.0;
      return 0.5 / (t * std::sqrt(t));
    }
  }
  throw std::invalid_argument("bad KernelKind");
}

double kernel_cdf(KernelKind kind, double x) {
  switch (kind) {
    case KernelKind::Gaussian:
      return std_normal_cdf(x);
    case KernelKind::Logistic:
      // 1/(1+e^{-x}); for x<0 use e^x/(1+e^x)
      return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                      : std::exp(x) / (1.0 + std::exp(x));
    case KernelKind::Epanechnikov: {
      if (x <= -1.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return 0.5 + 0.75 * x - 0.25 * x * x * x;
    }
    case KernelKind::Triangular: {
      if (x <= -1.0) return 0.0;
      if (x >= 1.0) return 1.0;
      if (x < 0.0) return 0.5 * (1.0 + x) * (1.0 + x);
      return 1.0 - 0.5 * (1.0 - x) * (1.0 - x);
    }
    case KernelKind::PseudoHuberGen:
      return 0.5 + 0.5 * x / std::sqrt(x * x + 1.0);
  }
  throw std::invalid_argument("bad KernelKind");
}

double unit_loss(KernelKind kind, double x) {
  double ax = std::abs(x);
  switch (kind) {
    case KernelKind::Gaussian:
      // sqrt(2/pi) e^{-x^2/2} + x(1 - 2 Phi(-x))
      return kSqrt2OverPi * std::exp(-0.5 * x * x) +
             ax * (1.0 - 2.0 * std_normal_cdf(-ax));
    case KernelKind::Logistic:
      // x + 2 log(1 + e^{-x}), reflected to x >= 0 for stability
      return ax + 2.0 * std::log1p(std::exp(-ax));
    case KernelKind::Epanechnikov:
      return ax <= 1.0 ? 0.75 * x * x - 0.125 * x * x * x * x + 0.375 : ax;
    case KernelKind::Triangular:
      return ax <= 1.0 ? x * x - ax * ax * ax / 3.0 + 1.0 / 3.0 : ax;
    case KernelKind::PseudoHuberGen:
      return std::sqrt(x * x + 1.0);
  }
  throw std::invalid_argument("bad KernelKind");
}

double loss_eval(const SmoothedLoss& loss, double r) {
  if (!(loss.delta > 0.0)) throw std::invalid_argument("loss_eval: delta must be positive");
  return loss.delta * unit_loss(loss.kernel, r / loss.delta);
}

double loss_deriv(const SmoothedLoss& loss, double r) {
  if (!(loss.delta > 0.0)) throw std::invalid_argument("loss_deriv: delta must be positive");
  return 2.0 * kernel_cdf(loss.kernel, r / loss.delta) - 1.0;
}

double loss_second_deriv(const SmoothedLoss& loss, double r) {
  if (!(loss.delta > 0.0)) throw std::invalid_argument("loss_second_deriv: delta must be positive");
  return 2.0 / loss.delta * kernel_eval(loss.kernel, r / loss.delta);
}

}  // namespace srpr
