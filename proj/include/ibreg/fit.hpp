#pragma once

// Fitting the discrete and continuous parts, which separate in the likelihood
// and in every robust objective.

#include <optional>

#include "ibreg/objectives.hpp"
#include "ibreg/optimizer.hpp"

namespace ibreg {

struct PartFit {
  Vector estimate;
  ConvergenceReport report;
};

/// Objective minimized for the discrete part (negative mean log-likelihood at alpha = 0).
double discrete_loss(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa, double alpha_disc,
                     bool clamp, Vector* gradient);

/// Objective minimized for the continuous part under each estimator.
double continuous_loss(const ObservationSet& obs, const LinkSpec& links, EstimatorKind kind, const Vector& theta,
                       double alpha_cont, bool clamp, Vector* gradient);

PartFit fit_discrete(const ObservationSet& obs, const LinkSpec& links, double alpha_disc, const Vector& start,
                     const OptimizerConfig& config = {}, bool clamp = false);

PartFit fit_continuous(const ObservationSet& obs, const LinkSpec& links, EstimatorKind kind, double alpha_cont,
                       const Vector& start, const OptimizerConfig& config = {}, bool clamp = false);

struct FitOptions {
  EstimatorKind estimator = EstimatorKind::mle;
  TuningConstants alpha;
  LinkSpec links;
  OptimizerConfig optimizer;
  bool clamp = false;
  bool covariance = true;
};

struct FitResult {
  EstimatorKind estimator = EstimatorKind::mle;
  LinkSpec links;
  TuningConstants alpha;
  ParamVector estimate;
  Matrix covariance;  ///< empty when not requested
  Vector se;
  ConvergenceReport discrete;
  ConvergenceReport continuous;
  /// Robustness weights over the continuous subsample, max-normalized.
  Vector weights;

  bool converged() const noexcept { return discrete.converged && continuous.converged; }
};

/// Fits both parts. Robust fits start from the maximum likelihood solution of
/// the same part unless `start` is given.
FitResult fit(const ObservationSet& obs, const FitOptions& options, const std::optional<ParamVector>& start = {});

}  // namespace ibreg
