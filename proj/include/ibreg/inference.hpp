#pragma once

// Asymptotic covariance matrices of the estimators and per-coordinate Wald
// tests.
//
// The continuous-part matrices are sums over all n observations with weights
// 1 - theta_i (expected information); `ContinuousWeighting::subsample`
// instead sums over the observations in (0,1) with unit weights, which is the
// covariance of a plain beta regression fitted to that subsample.

#include <string>
#include <utility>
#include <vector>

#include "ibreg/fit.hpp"

namespace ibreg {

enum class ContinuousWeighting { expected, subsample };

/// A^{-1} B A^{-1} for the discrete part.
Matrix cov_discrete(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa, double alpha_disc);

/// J^{-1} K J^{-1} for the LSMLE; at alpha = 0 the inverse beta information.
Matrix cov_mlse(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon, double alpha_cont,
                ContinuousWeighting weighting = ContinuousWeighting::expected);

/// Lambda^{-1} Omega Lambda^{-1} for the LMDPDE.
Matrix cov_mlme(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon, double alpha_cont,
                ContinuousWeighting weighting = ContinuousWeighting::expected);

/// Per-observation blocks of the LMDPDE matrices on the predictor scale,
/// int (d log h / d eta)(d log h / d eta)' h^a dy* for the (mean, precision)
/// predictors.
struct ScoreMomentBlock {
  double mm = 0.0;
  double mp = 0.0;
  double pp = 0.0;
};
ScoreMomentBlock lmdpde_score_moments(double mu, double phi, double power, const LinkSpec& links);

/// Per-observation sensitivity J and variability K blocks of the LSMLE on
/// the predictor scale; `phi` is the model precision.
std::pair<ScoreMomentBlock, ScoreMomentBlock> lsmle_blocks(double mu, double phi, double alpha,
                                                           const LinkSpec& links);

struct CovarianceResult {
  Matrix V;  ///< block diagonal in (kappa, theta)
  Vector se;
};

/// Full covariance for an estimator at the given estimates.
CovarianceResult covariance(const ObservationSet& obs, const LinkSpec& links, EstimatorKind kind,
                            const ParamVector& upsilon, const TuningConstants& alpha,
                            ContinuousWeighting weighting = ContinuousWeighting::expected);

struct WaldTest {
  double statistic = 0.0;  ///< ((estimate - null) / se)^2
  double z = 0.0;
  double p_value = 1.0;
  double null_value = 0.0;
  Eigen::Index index = 0;
};

WaldTest wald_test(double estimate, double se, double null_value);
WaldTest wald_test(const FitResult& fit, Eigen::Index index, double null_value = 0.0);

/// Names the columns of the parameter vector (kappa, beta, gamma) in order.
std::vector<std::string> default_parameter_names(Eigen::Index p0, Eigen::Index p1, Eigen::Index p2);

}  // namespace ibreg
