#include "doctest.h"

#include <cmath>
#include <numbers>

#include "ibreg/special.hpp"

using namespace ibreg;
using std::numbers::pi;

TEST_CASE("log_beta against closed forms") {
  CHECK(log_beta(1.5, 1.5) == doctest::Approx(std::log(pi / 8)).epsilon(1e-14));
  CHECK(log_beta(2, 3) == doctest::Approx(std::log(1.0 / 12)).epsilon(1e-14));
  CHECK(log_beta(1, 7) == doctest::Approx(-std::log(7.0)).epsilon(1e-14));
  // large arguments: compare to lgamma in long double
  for (double a : {50.0, 800.0, 12000.0}) {
    for (double b : {0.3, 20.0, 4000.0}) {
      long double ref = std::lgammal((long double)a) + std::lgammal((long double)b) - std::lgammal((long double)a + b);
      CHECK(log_beta(a, b) == doctest::Approx((double)ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("digamma and trigamma") {
  const double euler = 0.57721566490153286061;
  CHECK(digamma(1) == doctest::Approx(-euler).epsilon(1e-14));
  CHECK(digamma(3) == doctest::Approx(1.5 - euler).epsilon(1e-14));
  CHECK(digamma(7) == doctest::Approx(1 + 0.5 + 1.0 / 3 + 0.25 + 0.2 + 1.0 / 6 - euler).epsilon(1e-14));
  CHECK(digamma(0.5) == doctest::Approx(-euler - 2 * std::log(2.0)).epsilon(1e-14));
  CHECK(trigamma(1) == doctest::Approx(pi * pi / 6).epsilon(1e-14));
  CHECK(trigamma(2) == doctest::Approx(pi * pi / 6 - 1).epsilon(1e-14));
  CHECK(trigamma(0.5) == doctest::Approx(pi * pi / 2).epsilon(1e-14));
  // recurrence psi(x+1) = psi(x) + 1/x across the series switch point
  for (double x : {0.01, 2.7, 9.5, 10.5, 333.3}) {
    CHECK(digamma(x + 1) == doctest::Approx(digamma(x) + 1 / x).epsilon(1e-13));
    CHECK(trigamma(x + 1) == doctest::Approx(trigamma(x) - 1 / (x * x)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(digamma(0.0), DomainError);
}

TEST_CASE("logistic helpers") {
  CHECK(logit(0.5) == 0.0);
  CHECK(expit(logit(0.3)) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(expit(-800) >= 0.0);
  CHECK(log1p_exp(800) == doctest::Approx(800));
  CHECK(log1p_exp(-800) == doctest::Approx(0.0));
  CHECK(log1p_exp(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(log_sum_exp(1000, 1000) == doctest::Approx(1000 + std::log(2.0)));
  CHECK_THROWS_AS(logit(1.0), DomainError);
}

TEST_CASE("normal and chi-square tails") {
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-14));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(chisq1_survival(3.841458820694124) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(beta_cdf(0.5, 0.5, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("quadrature") {
  QuadratureSpec s;
  const double one = integrate([](double x) { return std::exp(-x - 2 * log1p_exp(-x)); }, s);
  CHECK(one == doctest::Approx(1.0).epsilon(1e-10));
  // integral over R of h(y*; 0.5, 2)^1.5: B(1.5,1.5)/B(1,1)^1.5 = pi/8
  const double v = integrate([](double t) { return std::exp(1.5 * (t - 2 * log1p_exp(t))); }, s);
  CHECK(v == doctest::Approx(pi / 8).epsilon(1e-10));
  QuadratureSpec fin;
  fin.lower = 0;
  fin.upper = 1;
  CHECK(integrate([](double x) { return 1 / std::sqrt(x); }, fin) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("compensated summation") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1000.0);
}
