#include "ibreg/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace ibreg {

namespace {

constexpr double kLnSqrt2Pi = 0.918938533204672741780329736406;

void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || std::isnan(x))
    throw DomainError(std::string(fn) + ": argument must be positive, got " + std::to_string(x));
}

// lgamma(x) - [(x - 1/2) log x - x + log sqrt(2 pi)], valid for x >= 10.
double lgamma_correction(double x) {
  if (std::isinf(x)) return 0.0;
  const double f = 1.0 / (x * x);
  return (1.0 / x) *
         (1.0 / 12.0 +
          f * (-1.0 / 360.0 +
               f * (1.0 / 1260.0 +
                    f * (-1.0 / 1680.0 + f * (1.0 / 1188.0 + f * (-691.0 / 360360.0 + f / 156.0))))));
}

}  // namespace

double log_beta(double a, double b) {
  require_positive(a, "log_beta");
  require_positive(b, "log_beta");
  const double p = std::min(a, b);
  const double q = std::max(a, b);
  const double s = p / q;  // in (0, 1]
  const double log_pq = std::log(q) + std::log1p(s);  // log(p + q) without overflow
  if (p >= 10.0) {
    const double corr = lgamma_correction(p) + lgamma_correction(q) - lgamma_correction(q * (1.0 + s));
    return -0.5 * std::log(q) + kLnSqrt2Pi + corr + (p - 0.5) * std::log(s / (1.0 + s)) -
           q * std::log1p(s);
  }
  if (q >= 10.0) {
    const double corr = lgamma_correction(q) - lgamma_correction(q * (1.0 + s));
    return boost::math::lgamma(p) + corr + p - p * log_pq - (q - 0.5) * std::log1p(s);
  }
  return boost::math::lgamma(p) + boost::math::lgamma(q) - boost::math::lgamma(p + q);
}

double digamma(double x) {
  require_positive(x, "digamma");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  const double series =
      f * (-1.0 / 12.0 +
           f * (1.0 / 120.0 +
                f * (-1.0 / 252.0 +
                     f * (1.0 / 240.0 + f * (-1.0 / 132.0 + f * (691.0 / 32760.0 + f * (-1.0 / 12.0)))))));
  return result + std::log(x) - 0.5 / x + series;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  const double series =
      (f / x) *
      (1.0 / 6.0 +
       f * (-1.0 / 30.0 +
            f * (1.0 / 42.0 +
                 f * (-1.0 / 30.0 + f * (5.0 / 66.0 + f * (-691.0 / 2730.0 + f * (7.0 / 6.0)))))));
  return result + 1.0 / x + 0.5 * f + series;
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("logit: argument must lie in (0,1)");
  return std::log(p) - std::log1p(-p);
}

double expit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log1p_exp(double x) {
  if (x > 35.0) return x + std::exp(-x);
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (std::isinf(m)) return m;
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: probability must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double chisq1_survival(double statistic) {
  if (!(statistic >= 0.0)) throw DomainError("chisq1_survival: statistic must be non-negative");
  return std::erfc(std::sqrt(0.5 * statistic));
}

double beta_cdf(double y, double mu, double phi) {
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("beta_cdf: mu must lie in (0,1)");
  require_positive(phi, "beta_cdf");
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  return boost::math::ibeta(mu * phi, (1.0 - mu) * phi, y);
}

double beta_survival(double y, double mu, double phi) {
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("beta_survival: mu must lie in (0,1)");
  require_positive(phi, "beta_survival");
  if (y <= 0.0) return 1.0;
  if (y >= 1.0) return 0.0;
  return boost::math::ibetac(mu * phi, (1.0 - mu) * phi, y);
}

namespace {

template <class Integrator>
double run_quadrature(Integrator& integrator, const std::function<double(double)>& f, double a,
                      double b, double abs_tol) {
  double err = 0.0;
  double l1 = 0.0;
  double value = integrator.integrate(f, a, b, 1e-8, &err, &l1);
  if (err > abs_tol && l1 > 0.0) {
    const double rel = std::max(abs_tol / l1, 4.0 * std::numeric_limits<double>::epsilon());
    value = integrator.integrate(f, a, b, rel, &err, &l1);
  }
  if (!(err <= abs_tol) || !std::isfinite(value))
    throw QuadratureError("integrate: refinement budget exhausted", value, err);
  return value;
}

}  // namespace

double integrate(const std::function<double(double)>& f, const QuadratureSpec& spec) {
  if (!(spec.lower < spec.upper)) throw DomainError("integrate: lower must be below upper");
  if (!(spec.abs_tol > 0.0)) throw DomainError("integrate: abs_tol must be positive");
  if (spec.max_subdivisions < 1) throw DomainError("integrate: max_subdivisions must be >= 1");

  // Refinement levels double the node count, so the subdivision budget maps to levels by log2.
  const int budget_levels = static_cast<int>(std::ceil(std::log2(static_cast<double>(spec.max_subdivisions))));
  const bool lower_inf = std::isinf(spec.lower);
  const bool upper_inf = std::isinf(spec.upper);
  try {
    if (!lower_inf && !upper_inf) {
      boost::math::quadrature::tanh_sinh<double> ts(static_cast<std::size_t>(std::clamp(budget_levels + 7, 4, 20)));
      return run_quadrature(ts, f, spec.lower, spec.upper, spec.abs_tol);
    }
    boost::math::quadrature::exp_sinh<double> es(static_cast<std::size_t>(std::clamp(budget_levels + 1, 3, 12)));
    if (lower_inf && upper_inf) {
      const double half_tol = 0.5 * spec.abs_tol;
      return run_quadrature(es, f, -std::numeric_limits<double>::infinity(), 0.0, half_tol) +
             run_quadrature(es, f, 0.0, std::numeric_limits<double>::infinity(), half_tol);
    }
    return run_quadrature(es, f, spec.lower, spec.upper, spec.abs_tol);
  } catch (const QuadratureError&) {
    throw;
  } catch (const std::exception& e) {
    throw QuadratureError(std::string("integrate: ") + e.what(), std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::infinity());
  }
}

}  // namespace ibreg
