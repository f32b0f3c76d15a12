#include "ibreg/fit.hpp"

#include "ibreg/diagnostics.hpp"
#include "ibreg/inference.hpp"

namespace ibreg {

double discrete_loss(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa, double alpha_disc,
                     bool clamp, Vector* gradient) {
  return detail::mdpde_disc_eval(obs, links, kappa, alpha_disc, clamp, gradient);
}

double continuous_loss(const ObservationSet& obs, const LinkSpec& links, EstimatorKind kind, const Vector& theta,
                       double alpha_cont, bool clamp, Vector* gradient) {
  // Sums are scaled by 1/n so that the gradient tolerance means the same
  // thing for every estimator.
  const double n = static_cast<double>(obs.n());
  double v = 0.0;
  if (kind == EstimatorKind::mle || alpha_cont == 0.0) {
    v = -detail::beta_eval(obs, links, theta, clamp, gradient) / n;
    if (gradient) *gradient /= -n;
  } else if (kind == EstimatorKind::mlse) {
    v = -detail::lsmle_eval(obs, links, theta, alpha_cont, clamp, gradient) / n;
    if (gradient) *gradient /= -n;
  } else {
    v = detail::lmdpde_eval(obs, links, theta, alpha_cont, clamp, gradient);
  }
  return v;
}

PartFit fit_discrete(const ObservationSet& obs, const LinkSpec& links, double alpha_disc, const Vector& start,
                     const OptimizerConfig& config, bool clamp) {
  auto f = [&](const Vector& k, Vector* g) { return discrete_loss(obs, links, k, alpha_disc, clamp, g); };
  OptimizationResult r = minimize(f, start, config);
  return {std::move(r.x), std::move(r.report)};
}

PartFit fit_continuous(const ObservationSet& obs, const LinkSpec& links, EstimatorKind kind, double alpha_cont,
                       const Vector& start, const OptimizerConfig& config, bool clamp) {
  if (obs.n_dagger() <= obs.p1() + obs.p2())
    throw InputError("too few observations in (0,1) to fit the continuous part");
  auto f = [&](const Vector& t, Vector* g) { return continuous_loss(obs, links, kind, t, alpha_cont, clamp, g); };
  OptimizationResult r = minimize(f, start, config);
  return {std::move(r.x), std::move(r.report)};
}

FitResult fit(const ObservationSet& obs, const FitOptions& options, const std::optional<ParamVector>& start) {
  options.alpha.validate();
  FitResult out;
  out.estimator = options.estimator;
  out.links = options.links;
  out.alpha = options.estimator == EstimatorKind::mle ? TuningConstants{} : options.alpha;
  const ParamVector s0 = start ? *start : default_start(obs, options.links, options.estimator);
  check_dimensions(obs, s0);

  Vector kappa0 = s0.kappa;
  Vector theta0 = s0.theta();
  if (!start) {
    if (out.alpha.alpha_disc > 0.0) {
      const PartFit ml = fit_discrete(obs, options.links, 0.0, kappa0, options.optimizer, options.clamp);
      if (ml.report.converged) kappa0 = ml.estimate;
    }
    if (out.alpha.alpha_cont > 0.0) {
      const PartFit ml =
          fit_continuous(obs, options.links, EstimatorKind::mle, 0.0, theta0, options.optimizer, options.clamp);
      if (ml.report.converged) theta0 = ml.estimate;
    }
  }
  PartFit d = fit_discrete(obs, options.links, out.alpha.alpha_disc, kappa0, options.optimizer, options.clamp);
  PartFit c = fit_continuous(obs, options.links, options.estimator, out.alpha.alpha_cont, theta0, options.optimizer,
                             options.clamp);
  out.estimate = ParamVector::from_parts(d.estimate, c.estimate, obs.p1());
  out.discrete = std::move(d.report);
  out.continuous = std::move(c.report);
  if (options.covariance) {
    CovarianceResult cov = covariance(obs, options.links, options.estimator, out.estimate, out.alpha);
    out.covariance = std::move(cov.V);
    out.se = std::move(cov.se);
  }
  out.weights = robust_weights(obs, options.links, out.estimate, options.estimator, out.alpha.alpha_cont);
  return out;
}

}  // namespace ibreg
