#pragma once

// Scalar special functions and numerical primitives shared by every module.

#include <cmath>
#include <functional>
#include <limits>

#include "ibreg/errors.hpp"

namespace ibreg {

/// ln B(a, b). Uses Stirling corrections when an argument is large so that
/// precisions in the thousands do not lose digits to cancellation.
double log_beta(double a, double b);

/// Digamma function psi(x) for x > 0.
double digamma(double x);

/// Trigamma function psi'(x) for x > 0.
double trigamma(double x);

double logit(double p);
double expit(double x);

/// log(1 + exp(x)) without overflow.
double log1p_exp(double x);

/// log(exp(a) + exp(b)).
double log_sum_exp(double a, double b);

double normal_cdf(double x);
double normal_quantile(double p);

/// Upper tail of the chi-square distribution with one degree of freedom.
double chisq1_survival(double statistic);

/// CDF of the beta distribution in mean/precision form.
double beta_cdf(double y, double mu, double phi);
/// Upper tail 1 - beta_cdf, accurate when the CDF is close to one.
double beta_survival(double y, double mu, double phi);

struct QuadratureSpec {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double abs_tol = 1e-10;
  int max_subdivisions = 200;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double estimate, double error_bound)
      : NumericalError(what), estimate_(estimate), error_bound_(error_bound) {}
  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

/// Adaptive double-exponential quadrature of f over [lower, upper]. Infinite
/// endpoints are handled by the exp-sinh substitution on each half line.
/// Throws QuadratureError when the refinement budget is exhausted before the
/// error estimate falls below abs_tol.
double integrate(const std::function<double(double)>& f, const QuadratureSpec& spec);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace ibreg
