#pragma once

// Objective functions and estimating functions of the maximum likelihood,
// discrete-part MDPDE, and continuous-part LSMLE / LMDPDE estimators.
//
// Every estimating function is oriented like a score (it reduces to the
// likelihood score at alpha = 0) and is the gradient of its objective up to a
// known factor:
//   mle_score        =  grad log_likelihood
//   mdpde_disc_estfun = -n grad mdpde_disc_objective
//   lsmle_estfun      =  grad lsmle_objective
//   lmdpde_estfun     = -(n / (1 + alpha)) grad lmdpde_objective

#include "ibreg/model.hpp"

namespace ibreg {

struct TuningConstants {
  double alpha_disc = 0.0;  ///< in [0, 1]
  double alpha_cont = 0.0;  ///< in [0, 1)

  void validate() const;
  friend bool operator==(const TuningConstants&, const TuningConstants&) = default;
};

struct EstimatingFunctionValue {
  Vector u_kappa;  ///< length p0
  Vector u_theta;  ///< length p1 + p2, beta block first
};

/// Contribution of one continuous observation on the scale of the mean and
/// precision linear predictors; the parameter-scale contribution is
/// `mean * X_i` for beta and `precision * Z_i` for gamma.
struct PredictorScore {
  double mean = 0.0;
  double precision = 0.0;
};

/// Integral of h(y*; mu, phi)^power over the real line,
/// B(power mu phi, power (1 - mu) phi) / B(mu phi, (1 - mu) phi)^power.
double power_integral(double mu, double phi, double power);

/// Likelihood score of one observation of the logit-beta model.
PredictorScore logit_beta_score(double y_star, double mu, double phi, const LinkSpec& links);

/// U*(y*) h*(y*)^alpha for the LSMLE; `phi` is the model precision g_phi^{-1}(Z'gamma).
PredictorScore lsmle_contribution(double y_star, double mu, double phi, double alpha, const LinkSpec& links);

/// E[U h^alpha] under the model, i.e. the centring term of the LMDPDE.
PredictorScore lmdpde_expectation(double mu, double phi, double alpha, const LinkSpec& links);

/// U(y*) h(y*)^alpha - E[U h^alpha] for the LMDPDE.
PredictorScore lmdpde_contribution(double y_star, double mu, double phi, double alpha, const LinkSpec& links);

// -- maximum likelihood

double bernoulli_log_likelihood(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa);
Vector bernoulli_score(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa);
double beta_log_likelihood(const ObservationSet& obs, const LinkSpec& links, const Vector& theta);
Vector beta_score(const ObservationSet& obs, const LinkSpec& links, const Vector& theta);

EstimatingFunctionValue mle_score(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon);

// -- discrete part

/// Mean density power divergence H_n(kappa); at alpha = 0 the negative mean
/// Bernoulli log-likelihood.
double mdpde_disc_objective(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa,
                            double alpha_disc);
Vector mdpde_disc_estfun(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa,
                         double alpha_disc);

// -- continuous part; theta = (beta, gamma)

double lsmle_objective(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha_cont);
Vector lsmle_estfun(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha_cont);

double lmdpde_objective(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha_cont);
Vector lmdpde_estfun(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha_cont);

namespace detail {

/// Objective value and, if `gradient` is non-null, its gradient. `clamp`
/// applies the probability floor used during optimization.
double bernoulli_eval(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa, bool clamp,
                      Vector* gradient);
double mdpde_disc_eval(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa, double alpha,
                       bool clamp, Vector* gradient);
double beta_eval(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, bool clamp,
                 Vector* gradient);
double lsmle_eval(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha, bool clamp,
                  Vector* gradient);
double lmdpde_eval(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha, bool clamp,
                   Vector* gradient);

}  // namespace detail

}  // namespace ibreg
