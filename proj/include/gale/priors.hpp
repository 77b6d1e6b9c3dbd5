#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gale/special.hpp"

namespace gale::priors {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Weibull log density with shape alpha and scale lambda,
///   f(y) = (alpha/lambda) (y/lambda)^(alpha-1) exp(-(y/lambda)^alpha).
inline double weibull_logpdf(double y, double alpha, double lambda) {
  if (!(y > 0.0)) throw std::invalid_argument("weibull_logpdf: y must be > 0");
  if (!(alpha > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("weibull_logpdf: alpha and lambda must be > 0");
  const double lz = std::log(y) - std::log(lambda);
  const double t = std::exp(alpha * lz);  // (y/lambda)^alpha; may overflow to inf
  return std::log(alpha) - std::log(lambda) + (alpha - 1.0) * lz - t;
}

namespace detail {

inline constexpr double kZeta2 = 1.644934066848226436;  // pi^2/6

/// Kullback-Leibler divergence KL(Weibull(alpha, s) || Exp(s0)) where the
/// exponential base has its scale matched to the Weibull variance,
/// s0 = s * v(alpha), v^2 = Gamma(1+2/alpha) - Gamma(1+1/alpha)^2.
/// The scale s cancels, so this depends on alpha alone. Zero iff alpha = 1.
inline double weibull_kld(double alpha) {
  const double x = 1.0 / alpha;
  const double l2 = std::lgamma(1.0 + 2.0 * x);
  if (l2 > 650.0) return std::numeric_limits<double>::infinity();
  const double l1 = std::lgamma(1.0 + x);
  double v2 = std::exp(l2) - std::exp(2.0 * l1);
  if (x < 1e-5) v2 = kZeta2 * x * x * std::exp(-2.0 * euler_gamma * x);  // cancellation guard
  const double v = std::sqrt(v2);
  return std::log(alpha) + std::log(v) - euler_gamma * (alpha - 1.0) / alpha - 1.0 +
         std::exp(l1) / v;
}

/// d/dalpha of weibull_kld, in closed form.
inline double weibull_kld_derivative(double alpha) {
  const double x = 1.0 / alpha;
  const double a1 = 1.0 + x;
  const double a2 = 1.0 + 2.0 * x;
  const double g1 = std::tgamma(a1);
  const double g2 = std::tgamma(a2);
  const double p1 = digamma(a1);
  const double p2 = digamma(a2);
  double v2 = g2 - g1 * g1;
  if (x < 1e-5) v2 = kZeta2 * x * x * std::exp(-2.0 * euler_gamma * x);
  const double v = std::sqrt(v2);
  const double dv = (2.0 * x * x) * (g1 * g1 * p1 - g2 * p2) / (2.0 * v);
  return x + dv / v - euler_gamma * x * x - g1 * p1 * x * x / v - g1 * dv / v2;
}

// Taylor coefficients of weibull_kld at alpha = 1: KLD''(1) = 1 + pi^2/6
// exactly; the cubic term is evaluated once by finite differences of the
// closed form.
inline double kld_curvature_at_base() { return 1.0 + kZeta2; }

inline double kld_third_derivative_at_base() {
  static const double c3 = [] {
    const double h = 1e-2;
    return (weibull_kld(1.0 - 3 * h) - 8 * weibull_kld(1.0 - 2 * h) + 13 * weibull_kld(1.0 - h) -
            13 * weibull_kld(1.0 + h) + 8 * weibull_kld(1.0 + 2 * h) - weibull_kld(1.0 + 3 * h)) /
           (8 * h * h * h);
  }();
  return c3;
}

}  // namespace detail

/// Distance d(alpha) = sqrt(2 KLD(alpha)) of the Weibull shape from the
/// exponential base model alpha = 1.
inline double weibull_kld_distance(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("weibull_kld_distance: alpha must be > 0");
  const double da = alpha - 1.0;
  if (std::abs(da) < 1e-4) {
    // series form; sqrt(2 KLD) loses precision to cancellation this close in
    const double c2 = detail::kld_curvature_at_base();
    const double c3 = detail::kld_third_derivative_at_base();
    return std::sqrt(c2) * std::abs(da) * (1.0 + c3 / (6.0 * c2) * da);
  }
  return std::sqrt(2.0 * detail::weibull_kld(alpha));
}

/// Signed derivative d'(alpha). At the base model the two-sided limit does
/// not exist (|d| has a kink); the right-hand limit sqrt(KLD''(1)) is
/// returned there so |d'| stays continuous.
inline double weibull_kld_distance_dalpha(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("weibull_kld_distance_dalpha: alpha must be > 0");
  const double da = alpha - 1.0;
  const double c2 = detail::kld_curvature_at_base();
  const double c3 = detail::kld_third_derivative_at_base();
  if (std::abs(da) < 1e-4) {
    const double mag = std::sqrt(c2) * (1.0 + c3 / (3.0 * c2) * da);
    return da < 0.0 ? -mag : mag;
  }
  return detail::weibull_kld_derivative(alpha) / weibull_kld_distance(alpha);
}

struct PcPriorSpec {
  double theta = 5.0;  // penalization rate on the distance scale
};

/// Penalized-complexity log prior for the Weibull shape. The map
/// alpha -> d(alpha) is two-to-one (one branch on each side of the base
/// model), so each branch carries half of the exponential mass on d; with
/// that split the density integrates to one over (0, inf).
inline double pc_prior_logpdf(double alpha, const PcPriorSpec& spec) {
  if (!(alpha > 0.0)) throw std::invalid_argument("pc_prior_logpdf: alpha must be > 0");
  if (!(spec.theta > 0.0)) throw std::invalid_argument("pc_prior_logpdf: theta must be > 0");
  const double d = weibull_kld_distance(alpha);
  if (!std::isfinite(d)) return kNegInf;
  const double dp = std::abs(weibull_kld_distance_dalpha(alpha));
  return std::log(spec.theta) - std::log(2.0) - spec.theta * d + std::log(dp);
}

/// PC prior for a Gaussian-component precision tau: exponential on the
/// standard-deviation scale sigma = tau^(-1/2), calibrated by
/// P(sigma > u) = prob. Density (lambda/2) tau^(-3/2) exp(-lambda/sqrt(tau)).
struct PcPrecisionPrior {
  double u = 1.0;
  double prob = 0.01;
  double rate() const { return -std::log(prob) / u; }
};

inline double pc_precision_logpdf(double precision, const PcPrecisionPrior& spec) {
  if (!(precision > 0.0)) return kNegInf;
  const double lambda = spec.rate();
  return std::log(lambda) - std::log(2.0) - 1.5 * std::log(precision) -
         lambda / std::sqrt(precision);
}

/// Symmetric prior on an AR(1) lag-one correlation, shrinking toward
/// one-lag independence: (1+rho)/2 ~ Beta(a, a) with a > 1 so the mode sits
/// at rho = 0.
struct RhoPrior {
  double concentration = 2.0;
};

inline double ar1_rho_logpdf(double rho, const RhoPrior& spec) {
  if (!(std::abs(rho) < 1.0)) return kNegInf;
  const double a = spec.concentration;
  const double log_beta = 2.0 * std::lgamma(a) - std::lgamma(2.0 * a);
  const double b = 0.5 * (1.0 + rho);
  return -log_beta + (a - 1.0) * (std::log(b) + std::log1p(-b)) - std::log(2.0);
}

struct Ar1HyperSpec {
  RhoPrior rho;
  PcPrecisionPrior prec;
};

inline double ar1_log_prior(double rho, double precision, const Ar1HyperSpec& spec) {
  return ar1_rho_logpdf(rho, spec.rho) + pc_precision_logpdf(precision, spec.prec);
}

struct Rw2HyperSpec {
  PcPrecisionPrior prec;
};

inline double rw2_log_prior(double precision, const Rw2HyperSpec& spec) {
  return pc_precision_logpdf(precision, spec.prec);
}

/// Plain Gaussian prior, used for the log-scale SPDE parameters.
struct GaussianPrior {
  double mean = 0.0;
  double sd = 3.0;
};

inline double gaussian_logpdf(double x, const GaussianPrior& spec) {
  const double z = (x - spec.mean) / spec.sd;
  return -0.5 * std::log(2.0 * M_PI) - std::log(spec.sd) - 0.5 * z * z;
}

}  // namespace gale::priors
