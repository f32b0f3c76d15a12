#include "ibreg/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ibreg/special.hpp"

namespace ibreg {

void TuningConstants::validate() const {
  if (!(alpha_disc >= 0.0 && alpha_disc <= 1.0))
    throw InputError("discrete tuning constant must lie in [0,1], got " + std::to_string(alpha_disc));
  if (!(alpha_cont >= 0.0 && alpha_cont < 1.0))
    throw InputError("continuous tuning constant must lie in [0,1), got " + std::to_string(alpha_cont));
}

namespace {

void check_alpha_disc(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("discrete tuning constant must lie in [0,1]");
}

void check_alpha_cont(double a) {
  if (!(a >= 0.0 && a < 1.0)) throw DomainError("continuous tuning constant must lie in [0,1)");
}

void check_theta(const ObservationSet& obs, const Vector& theta) {
  if (theta.size() != obs.p1() + obs.p2())
    throw InputError("theta has length " + std::to_string(theta.size()) + ", expected " +
                     std::to_string(obs.p1() + obs.p2()));
}

void check_kappa(const ObservationSet& obs, const Vector& kappa) {
  if (kappa.size() != obs.p0())
    throw InputError("kappa has length " + std::to_string(kappa.size()) + ", expected " + std::to_string(obs.p0()));
}

// Mean and precision of one continuous observation.
struct MeanPrecision {
  double mu;
  double phi;
};

MeanPrecision continuous_parameters(const ObservationSet& obs, const LinkSpec& links, const Vector& theta,
                                    Eigen::Index i, bool clamp) {
  const Eigen::Index p1 = obs.p1();
  const double eta_mu = obs.X().row(i).dot(theta.head(p1));
  const double eta_phi = obs.Z().row(i).dot(theta.tail(obs.p2()));
  double mu = links.mu.inverse(eta_mu);
  const double phi = links.phi.inverse(eta_phi);
  if (clamp) mu = std::clamp(mu, kProbabilityFloor, 1.0 - kProbabilityFloor);
  if (!std::isfinite(eta_mu) || !(mu > 0.0 && mu < 1.0))
    throw NumericalError("mean predictor out of range at row " + std::to_string(i + 1));
  if (!std::isfinite(eta_phi) || !(phi > 0.0) || std::isinf(phi))
    throw NumericalError("precision predictor out of range at row " + std::to_string(i + 1));
  return {mu, phi};
}

BinaryProbability discrete_probability(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa,
                                       Eigen::Index i, bool clamp) {
  const double eta = obs.S().row(i).dot(kappa);
  if (!std::isfinite(eta)) throw NumericalError("discrete predictor out of range at row " + std::to_string(i + 1));
  BinaryProbability b = links.theta.binary(eta);
  if (clamp && !(b.p >= kProbabilityFloor && b.q >= kProbabilityFloor)) {
    b.p = std::clamp(b.p, kProbabilityFloor, 1.0 - kProbabilityFloor);
    b.q = 1.0 - b.p;
    b.log_p = std::log(b.p);
    b.log_q = std::log(b.q);
    b.dp = 1.0 / links.theta.derivative(b.p);
    b.dp_pq = b.dp / (b.p * b.q);
  }
  if (!(b.p > 0.0 && b.q > 0.0 && std::isfinite(b.log_p) && std::isfinite(b.log_q)))
    throw NumericalError("discrete predictor out of range at row " + std::to_string(i + 1));
  return b;
}

void accumulate(Vector& out, const ObservationSet& obs, Eigen::Index i, const PredictorScore& s, double scale) {
  const Eigen::Index p1 = obs.p1();
  out.head(p1).noalias() += (scale * s.mean) * obs.X().row(i).transpose();
  out.tail(obs.p2()).noalias() += (scale * s.precision) * obs.Z().row(i).transpose();
}

double y_dagger_from_star(double y_star) { return -log1p_exp(y_star); }

}  // namespace

// ---------------------------------------------------------------- per-observation pieces

double power_integral(double mu, double phi, double power) {
  if (!(power > 0.0)) throw DomainError("power_integral: power must be positive");
  const double a = mu * phi;
  const double b = (1.0 - mu) * phi;
  return std::exp(log_beta(power * a, power * b) - power * log_beta(a, b));
}

PredictorScore logit_beta_score(double y_star, double mu, double phi, const LinkSpec& links) {
  const ConditionalMoments m = conditional_moments(mu, phi);
  const double r = y_star - m.mu_star;
  const double y_dagger = y_dagger_from_star(y_star);
  return {phi * r / links.mu.derivative(mu), (mu * r + (y_dagger - m.mu_dagger)) / links.phi.derivative(phi)};
}

PredictorScore lsmle_contribution(double y_star, double mu, double phi, double alpha, const LinkSpec& links) {
  check_alpha_cont(alpha);
  if (alpha == 0.0) return logit_beta_score(y_star, mu, phi, links);
  const double q = 1.0 - alpha;
  const double phi_w = phi / q;  // working precision of the power-transformed density
  const ConditionalMoments m = conditional_moments(mu, phi_w);
  const double r = y_star - m.mu_star;
  const double y_dagger = y_dagger_from_star(y_star);
  const double weight = std::exp(alpha * logit_beta_log_density(y_star, mu, phi_w));
  return {weight * phi_w * r / links.mu.derivative(mu),
          weight * (mu * r + (y_dagger - m.mu_dagger)) / (q * links.phi.derivative(phi))};
}

PredictorScore lmdpde_expectation(double mu, double phi, double alpha, const LinkSpec& links) {
  check_alpha_cont(alpha);
  if (alpha == 0.0) return {};
  const double k = power_integral(mu, phi, 1.0 + alpha);
  const ConditionalMoments base = conditional_moments(mu, phi);
  const ConditionalMoments shifted = conditional_moments(mu, phi * (1.0 + alpha));
  const double d_star = shifted.mu_star - base.mu_star;
  const double d_dagger = shifted.mu_dagger - base.mu_dagger;
  return {phi * k * d_star / links.mu.derivative(mu), k * (mu * d_star + d_dagger) / links.phi.derivative(phi)};
}

PredictorScore lmdpde_contribution(double y_star, double mu, double phi, double alpha, const LinkSpec& links) {
  const PredictorScore u = logit_beta_score(y_star, mu, phi, links);
  if (alpha == 0.0) return u;
  const double weight = std::exp(alpha * logit_beta_log_density(y_star, mu, phi));
  const PredictorScore e = lmdpde_expectation(mu, phi, alpha, links);
  return {u.mean * weight - e.mean, u.precision * weight - e.precision};
}

// ---------------------------------------------------------------- evaluators

namespace detail {

double bernoulli_eval(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa, bool clamp,
                      Vector* gradient) {
  check_kappa(obs, kappa);
  CompensatedSum sum;
  if (gradient) *gradient = Vector::Zero(obs.p0());
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    const BinaryProbability b = discrete_probability(obs, links, kappa, i, clamp);
    const bool at_c = obs.indicator()[i] != 0.0;
    sum.add(at_c ? b.log_p : b.log_q);
    if (gradient) gradient->noalias() += ((at_c ? 1.0 / b.p : -1.0 / b.q) * b.dp) * obs.S().row(i).transpose();
  }
  return sum.value();
}

double mdpde_disc_eval(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa, double alpha,
                       bool clamp, Vector* gradient) {
  check_alpha_disc(alpha);
  const double n = static_cast<double>(obs.n());
  if (alpha == 0.0) {
    const double value = -bernoulli_eval(obs, links, kappa, clamp, gradient) / n;
    if (gradient) *gradient /= -n;
    return value;
  }
  check_kappa(obs, kappa);
  CompensatedSum sum;
  if (gradient) *gradient = Vector::Zero(obs.p0());
  const double ap1 = 1.0 + alpha;
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    const BinaryProbability b = discrete_probability(obs, links, kappa, i, clamp);
    const bool at_c = obs.indicator()[i] != 0.0;
    const double f_alpha = std::exp(alpha * (at_c ? b.log_p : b.log_q));
    const double t_a = std::exp(alpha * b.log_p);
    const double s_a = std::exp(alpha * b.log_q);
    sum.add(b.p * t_a + b.q * s_a - (ap1 / alpha) * f_alpha);
    if (gradient) {
      // dV/dtheta = (1+a)[t^a - (1-t)^a] - (1+a) f^a d log f / dt
      const double dlogf = at_c ? 1.0 / b.p : -1.0 / b.q;
      const double dv = ap1 * (t_a - s_a) - ap1 * f_alpha * dlogf;
      gradient->noalias() += (dv * b.dp) * obs.S().row(i).transpose();
    }
  }
  if (gradient) *gradient /= n;
  return sum.value() / n;
}

double beta_eval(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, bool clamp,
                 Vector* gradient) {
  check_theta(obs, theta);
  CompensatedSum sum;
  if (gradient) *gradient = Vector::Zero(theta.size());
  for (const Eigen::Index i : obs.continuous_indices()) {
    const auto [mu, phi] = continuous_parameters(obs, links, theta, i, clamp);
    sum.add(-log_beta(mu * phi, (1.0 - mu) * phi) + (mu * phi - 1.0) * std::log(obs.y()[i]) +
            ((1.0 - mu) * phi - 1.0) * obs.y_dagger()[i]);
    if (gradient) accumulate(*gradient, obs, i, logit_beta_score(obs.y_star()[i], mu, phi, links), 1.0);
  }
  return sum.value();
}

double lsmle_eval(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha, bool clamp,
                  Vector* gradient) {
  check_alpha_cont(alpha);
  check_theta(obs, theta);
  CompensatedSum sum;
  if (gradient) *gradient = Vector::Zero(theta.size());
  const double q = 1.0 - alpha;
  for (const Eigen::Index i : obs.continuous_indices()) {
    const auto [mu, phi] = continuous_parameters(obs, links, theta, i, clamp);
    const double ys = obs.y_star()[i];
    const double phi_w = phi / q;
    const double log_h = logit_beta_log_density(ys, mu, phi_w);
    if (alpha == 0.0) {
      sum.add(log_h);
    } else {
      sum.add(std::expm1(alpha * log_h) / alpha);
    }
    if (gradient) {
      // d/dtheta of L_q(h*) = h*^alpha d log h*/dtheta, with d phi_w / d eta_phi = phi_w / (phi g'(phi)).
      const ConditionalMoments m = conditional_moments(mu, phi_w);
      const double w = std::exp(alpha * log_h);
      const double r = ys - m.mu_star;
      const double dlog_dmu = phi_w * r;
      const double dlog_dphiw = mu * r + (obs.y_dagger()[i] - m.mu_dagger);
      const double dphiw_deta = phi_w / (phi * links.phi.derivative(phi));
      accumulate(*gradient, obs, i, {w * dlog_dmu / links.mu.derivative(mu), w * dlog_dphiw * dphiw_deta}, 1.0);
    }
  }
  return sum.value();
}

double lmdpde_eval(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha, bool clamp,
                   Vector* gradient) {
  check_alpha_cont(alpha);
  check_theta(obs, theta);
  const double n = static_cast<double>(obs.n());
  CompensatedSum sum;
  if (gradient) *gradient = Vector::Zero(theta.size());
  const double ap1 = 1.0 + alpha;
  for (const Eigen::Index i : obs.continuous_indices()) {
    const auto [mu, phi] = continuous_parameters(obs, links, theta, i, clamp);
    const double ys = obs.y_star()[i];
    const double log_h = logit_beta_log_density(ys, mu, phi);
    const PredictorScore u = logit_beta_score(ys, mu, phi, links);
    if (alpha == 0.0) {
      sum.add(-log_h);
      if (gradient) accumulate(*gradient, obs, i, u, -1.0);
      continue;
    }
    const double a = mu * phi;
    const double b = (1.0 - mu) * phi;
    const double log_k = log_beta(ap1 * a, ap1 * b) - ap1 * log_beta(a, b);
    const double k = std::exp(log_k);
    const double w = std::exp(alpha * log_h);
    sum.add(k - (ap1 / alpha) * w);
    if (gradient) {
      // d log K / d mu and d log K / d phi from the log-beta representation.
      const double dq = digamma(ap1 * b);
      const double dq0 = digamma(b);
      const double dlogk_dmu = ap1 * phi * ((digamma(ap1 * a) - dq) - (digamma(a) - dq0));
      const double dlogk_dphi = ap1 * (mu * (digamma(ap1 * a) - dq) + dq - digamma(ap1 * phi)) -
                                ap1 * (mu * (digamma(a) - dq0) + dq0 - digamma(phi));
      const PredictorScore dk{k * dlogk_dmu / links.mu.derivative(mu), k * dlogk_dphi / links.phi.derivative(phi)};
      accumulate(*gradient, obs, i, {dk.mean - ap1 * w * u.mean, dk.precision - ap1 * w * u.precision}, 1.0);
    }
  }
  if (gradient) *gradient /= n;
  return sum.value() / n;
}

}  // namespace detail

// ---------------------------------------------------------------- public surface

double bernoulli_log_likelihood(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa) {
  return detail::bernoulli_eval(obs, links, kappa, false, nullptr);
}

Vector bernoulli_score(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa) {
  Vector g;
  detail::bernoulli_eval(obs, links, kappa, false, &g);
  return g;
}

double beta_log_likelihood(const ObservationSet& obs, const LinkSpec& links, const Vector& theta) {
  return detail::beta_eval(obs, links, theta, false, nullptr);
}

Vector beta_score(const ObservationSet& obs, const LinkSpec& links, const Vector& theta) {
  Vector g;
  detail::beta_eval(obs, links, theta, false, &g);
  return g;
}

EstimatingFunctionValue mle_score(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon) {
  check_dimensions(obs, upsilon);
  return {bernoulli_score(obs, links, upsilon.kappa), beta_score(obs, links, upsilon.theta())};
}

double mdpde_disc_objective(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa,
                            double alpha_disc) {
  return detail::mdpde_disc_eval(obs, links, kappa, alpha_disc, false, nullptr);
}

Vector mdpde_disc_estfun(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa,
                         double alpha_disc) {
  check_alpha_disc(alpha_disc);
  check_kappa(obs, kappa);
  const double a = alpha_disc;
  Vector u = Vector::Zero(obs.p0());
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    const BinaryProbability b = discrete_probability(obs, links, kappa, i, false);
    const bool at_c = obs.indicator()[i] != 0.0;
    const double f_alpha = std::exp(a * (at_c ? b.log_p : b.log_q));
    // E[(Y - t) f^a] / (t (1 - t)) = t^a - (1 - t)^a
    const double centre = std::exp(a * b.log_p) - std::exp(a * b.log_q);
    const double w = (1.0 + a) * ((at_c ? 1.0 / b.p : -1.0 / b.q) * f_alpha - centre) * b.dp;
    u.noalias() += w * obs.S().row(i).transpose();
  }
  return u;
}

double lsmle_objective(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha_cont) {
  return detail::lsmle_eval(obs, links, theta, alpha_cont, false, nullptr);
}

Vector lsmle_estfun(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha_cont) {
  check_alpha_cont(alpha_cont);
  check_theta(obs, theta);
  Vector u = Vector::Zero(theta.size());
  for (const Eigen::Index i : obs.continuous_indices()) {
    const auto [mu, phi] = continuous_parameters(obs, links, theta, i, false);
    accumulate(u, obs, i, lsmle_contribution(obs.y_star()[i], mu, phi, alpha_cont, links), 1.0);
  }
  return u;
}

double lmdpde_objective(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha_cont) {
  return detail::lmdpde_eval(obs, links, theta, alpha_cont, false, nullptr);
}

Vector lmdpde_estfun(const ObservationSet& obs, const LinkSpec& links, const Vector& theta, double alpha_cont) {
  check_alpha_cont(alpha_cont);
  check_theta(obs, theta);
  Vector u = Vector::Zero(theta.size());
  for (const Eigen::Index i : obs.continuous_indices()) {
    const auto [mu, phi] = continuous_parameters(obs, links, theta, i, false);
    accumulate(u, obs, i, lmdpde_contribution(obs.y_star()[i], mu, phi, alpha_cont, links), 1.0);
  }
  return u;
}

}  // namespace ibreg
