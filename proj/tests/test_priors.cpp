#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "gale/priors.hpp"
#include "oracles.hpp"

using namespace gale::priors;

TEST_CASE("weibull_logpdf reference points", "[priors]") {
  // alpha = 1 reduces to the unit exponential
  REQUIRE(weibull_logpdf(1.0, 1.0, 1.0) == Catch::Approx(-1.0).epsilon(1e-14));
  REQUIRE(weibull_logpdf(2.0, 2.0, 1.0) == Catch::Approx(std::log(4.0) - 4.0).epsilon(1e-14));
  REQUIRE_THROWS_AS(weibull_logpdf(0.0, 1.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(weibull_logpdf(-1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("weibull density integrates to one", "[priors]") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (double lambda : {0.5, 1.0, 3.0}) {
      auto f = [=](double y) { return std::exp(weibull_logpdf(y, alpha, lambda)); };
      const double upper = lambda * std::pow(45.0, 1.0 / alpha);
      const double mass = oracles::integrate_singular(f, 0.0, lambda) +
                          oracles::integrate(f, lambda, upper, 1e-12);
      REQUIRE(mass == Catch::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("kld distance vanishes only at the base model", "[priors]") {
  REQUIRE(weibull_kld_distance(1.0) == 0.0);
  for (double a : {0.5, 2.0, 5.0}) REQUIRE(weibull_kld_distance(a) > 0.0);
}

TEST_CASE("kld distance matches direct KL quadrature", "[priors]") {
  // the spec-level cross-check: closed form vs numerical KL integration
  REQUIRE(weibull_kld_distance(2.0) ==
          Catch::Approx(std::sqrt(2.0 * oracles::weibull_kl_quadrature(2.0))).epsilon(1e-6));
  for (double a : {0.3, 0.5, 0.8, 1.5, 3.0, 5.0}) {
    const double ref = std::sqrt(2.0 * oracles::weibull_kl_quadrature(a));
    REQUIRE(weibull_kld_distance(a) == Catch::Approx(ref).epsilon(1e-5));
  }
}

TEST_CASE("kld distance derivative matches finite differences", "[priors]") {
  for (double a : {0.5, 1.5, 3.0}) {
    const double h = 1e-6 * a;
    const double fd = (weibull_kld_distance(a + h) - weibull_kld_distance(a - h)) / (2 * h);
    REQUIRE(std::abs(weibull_kld_distance_dalpha(a)) ==
            Catch::Approx(std::abs(fd)).epsilon(1e-5));
  }
}

TEST_CASE("kld distance increases with |log alpha| on each side", "[priors]") {
  double prev = weibull_kld_distance(0.999);
  for (double la = -0.01; la > -3.0; la -= 0.05) {
    const double d = weibull_kld_distance(std::exp(la));
    REQUIRE(d > prev);
    prev = d;
  }
  prev = weibull_kld_distance(1.001);
  for (double la = 0.01; la < 3.0; la += 0.05) {
    const double d = weibull_kld_distance(std::exp(la));
    REQUIRE(d > prev);
    prev = d;
  }
}

TEST_CASE("pc prior integrates to one", "[priors]") {
  for (double theta : {2.0, 5.0, 10.0}) {
    PcPriorSpec spec{theta};
    auto f = [&](double a) {
      const double lp = pc_prior_logpdf(a, spec);
      return std::isfinite(lp) ? std::exp(lp) : 0.0;
    };
    const double mass = oracles::integrate(f, 1e-12, 1.0, 1e-10) +
                        oracles::integrate(f, 1.0, 400.0, 1e-10);
    REQUIRE(mass == Catch::Approx(1.0).margin(1e-3));
  }
}

TEST_CASE("pc prior is continuous across the base model", "[priors]") {
  PcPriorSpec spec{5.0};
  const double at = pc_prior_logpdf(1.0, spec);
  REQUIRE(std::isfinite(at));
  REQUIRE(pc_prior_logpdf(1.0 - 1e-9, spec) == Catch::Approx(at).margin(1e-6));
  REQUIRE(pc_prior_logpdf(1.0 + 1e-9, spec) == Catch::Approx(at).margin(1e-6));
  // also across the series/closed-form switchover
  REQUIRE(pc_prior_logpdf(1.0 + 1.0001e-4, spec) ==
          Catch::Approx(pc_prior_logpdf(1.0 + 0.9999e-4, spec)).margin(1e-6));
}

TEST_CASE("larger theta concentrates mass near the base model", "[priors]") {
  double prev = 0.0;
  for (double theta : {2.0, 5.0, 10.0}) {
    PcPriorSpec spec{theta};
    auto f = [&](double a) { return std::exp(pc_prior_logpdf(a, spec)); };
    const double mass = oracles::integrate(f, 0.8, 1.25, 1e-10);
    REQUIRE(mass > prev);
    prev = mass;
  }
}

TEST_CASE("pc precision prior integrates to one", "[priors]") {
  PcPrecisionPrior spec{1.0, 0.01};
  auto f = [&](double tau) { return std::exp(pc_precision_logpdf(tau, spec)); };
  // heavy right tail: P(tau > T) ~ rate/sqrt(T), so integrate far out
  double mass = oracles::integrate(f, 1e-9, 1.0, 1e-10);
  for (double lo = 1.0; lo < 1e12; lo *= 1e3) mass += oracles::integrate(f, lo, lo * 1e3, 1e-10);
  REQUIRE(mass == Catch::Approx(1.0).margin(1e-4));
  REQUIRE(pc_precision_logpdf(-1.0, spec) == kNegInf);
  REQUIRE(pc_precision_logpdf(0.0, spec) == kNegInf);
}

TEST_CASE("ar1 rho prior is symmetric with mode at zero", "[priors]") {
  RhoPrior spec{2.0};
  const double at0 = ar1_rho_logpdf(0.0, spec);
  for (double r : {0.1, 0.3, 0.7, 0.95}) {
    REQUIRE(ar1_rho_logpdf(r, spec) == Catch::Approx(ar1_rho_logpdf(-r, spec)).epsilon(1e-13));
    REQUIRE(ar1_rho_logpdf(r, spec) < at0);
  }
  auto f = [&](double r) { return std::exp(ar1_rho_logpdf(r, spec)); };
  REQUIRE(oracles::integrate(f, -1.0, 1.0, 1e-12) == Catch::Approx(1.0).margin(1e-6));
  REQUIRE(ar1_rho_logpdf(1.0, spec) == kNegInf);
  REQUIRE(ar1_rho_logpdf(-1.2, spec) == kNegInf);
}

TEST_CASE("composite hyper priors", "[priors]") {
  Ar1HyperSpec ar1;
  REQUIRE(ar1_log_prior(0.5, 2.0, ar1) ==
          Catch::Approx(ar1_rho_logpdf(0.5, ar1.rho) + pc_precision_logpdf(2.0, ar1.prec)));
  REQUIRE(ar1_log_prior(1.5, 2.0, ar1) == kNegInf);
  Rw2HyperSpec rw2;
  REQUIRE(rw2_log_prior(3.0, rw2) == Catch::Approx(pc_precision_logpdf(3.0, rw2.prec)));
  REQUIRE(rw2_log_prior(-3.0, rw2) == kNegInf);
}

TEST_CASE("gaussian hyper prior normalizes", "[priors]") {
  GaussianPrior g{0.5, 2.0};
  auto f = [&](double x) { return std::exp(gaussian_logpdf(x, g)); };
  REQUIRE(oracles::integrate(f, -20.0, 20.0, 1e-12) == Catch::Approx(1.0).epsilon(1e-10));
}
