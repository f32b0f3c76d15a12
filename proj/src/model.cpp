#include "ibreg/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ibreg/special.hpp"

namespace ibreg {

// ---------------------------------------------------------------- links

Link Link::from_name(std::string_view name) {
  if (name == "logit") return Link(LinkKind::logit);
  if (name == "log") return Link(LinkKind::log);
  if (name == "cloglog") return Link(LinkKind::cloglog);
  throw InputError("unknown link function '" + std::string(name) + "'");
}

std::string_view Link::name() const noexcept {
  switch (kind_) {
    case LinkKind::logit: return "logit";
    case LinkKind::log: return "log";
    case LinkKind::cloglog: return "cloglog";
  }
  return "?";
}

double Link::evaluate(double x) const {
  switch (kind_) {
    case LinkKind::logit: return logit(x);
    case LinkKind::log:
      if (!(x > 0.0)) throw DomainError("log link: argument must be positive");
      return std::log(x);
    case LinkKind::cloglog:
      if (!(x > 0.0 && x < 1.0)) throw DomainError("cloglog link: argument must lie in (0,1)");
      return std::log(-std::log1p(-x));
  }
  return 0.0;
}

double Link::inverse(double eta) const {
  switch (kind_) {
    case LinkKind::logit: return expit(eta);
    case LinkKind::log: return std::exp(eta);
    case LinkKind::cloglog: return -std::expm1(-std::exp(eta));
  }
  return 0.0;
}

BinaryProbability Link::binary(double eta) const {
  BinaryProbability b{};
  switch (kind_) {
    case LinkKind::logit:
      b.p = expit(eta);
      b.q = expit(-eta);
      b.log_p = -log1p_exp(-eta);
      b.log_q = -log1p_exp(eta);
      b.dp = b.p * b.q;
      b.dp_pq = 1.0;
      break;
    case LinkKind::cloglog: {
      const double e = std::exp(eta);
      b.p = -std::expm1(-e);
      b.q = std::exp(-e);
      b.log_p = std::log(b.p);
      b.log_q = -e;
      b.dp = e * b.q;
      b.dp_pq = e / b.p;
      break;
    }
    case LinkKind::log:
      b.p = std::exp(eta);
      b.q = -std::expm1(eta);
      b.log_p = eta;
      b.log_q = std::log1p(-b.p);
      b.dp = b.p;
      b.dp_pq = 1.0 / b.q;
      break;
  }
  return b;
}

double Link::derivative(double x) const {
  switch (kind_) {
    case LinkKind::logit: return 1.0 / (x * (1.0 - x));
    case LinkKind::log: return 1.0 / x;
    case LinkKind::cloglog: return -1.0 / ((1.0 - x) * std::log1p(-x));
  }
  return 0.0;
}

// ---------------------------------------------------------------- data

ObservationSet::ObservationSet(int c, Vector y, Matrix S, Matrix X, Matrix Z)
    : c_(c), y_(std::move(y)), S_(std::move(S)), X_(std::move(X)), Z_(std::move(Z)) {
  if (c_ != 0 && c_ != 1) throw InputError("inflation point c must be 0 or 1");
  const Eigen::Index n = y_.size();
  if (S_.rows() != n || X_.rows() != n || Z_.rows() != n)
    throw InputError("design matrices must have one row per response (n = " + std::to_string(n) + ")");
  if (S_.cols() < 1 || X_.cols() < 1 || Z_.cols() < 1)
    throw InputError("each submodel needs at least one column");
  if (S_.cols() + X_.cols() + Z_.cols() >= n)
    throw InputError("need p0 + p1 + p2 < n");
  if (!S_.allFinite() || !X_.allFinite() || !Z_.allFinite())
    throw InputError("design matrices contain non-finite entries");

  yc_ = Vector::Zero(n);
  y_star_ = Vector::Zero(n);
  y_dagger_ = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double yi = y_[i];
    if (yi == static_cast<double>(c_)) {
      yc_[i] = 1.0;
    } else if (yi > 0.0 && yi < 1.0) {
      wp_.push_back(i);
      y_star_[i] = std::log(yi) - std::log1p(-yi);
      y_dagger_[i] = std::log1p(-yi);
    } else {
      throw InputError("response at row " + std::to_string(i + 1) + " is " + std::to_string(yi) +
                       "; responses must lie in (0,1) or equal c = " + std::to_string(c_));
    }
  }
}

ObservationSet ObservationSet::select_rows(const std::vector<Eigen::Index>& rows) const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  Vector y(m);
  Matrix S(m, p0()), X(m, p1()), Z(m, p2());
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index i = rows[static_cast<std::size_t>(k)];
    if (i < 0 || i >= n()) throw InputError("row index " + std::to_string(i + 1) + " out of range");
    y[k] = y_[i];
    S.row(k) = S_.row(i);
    X.row(k) = X_.row(i);
    Z.row(k) = Z_.row(i);
  }
  return ObservationSet(c_, std::move(y), std::move(S), std::move(X), std::move(Z));
}

Vector ParamVector::theta() const {
  Vector t(beta.size() + gamma.size());
  t << beta, gamma;
  return t;
}

Vector ParamVector::flat() const {
  Vector v(size());
  v << kappa, beta, gamma;
  return v;
}

ParamVector ParamVector::from_flat(const Vector& v, Eigen::Index p0, Eigen::Index p1, Eigen::Index p2) {
  if (v.size() != p0 + p1 + p2) throw InputError("parameter vector length mismatch");
  return ParamVector{v.head(p0), v.segment(p0, p1), v.tail(p2)};
}

ParamVector ParamVector::from_parts(const Vector& kappa, const Vector& theta, Eigen::Index p1) {
  return ParamVector{kappa, theta.head(p1), theta.tail(theta.size() - p1)};
}

void check_dimensions(const ObservationSet& obs, const ParamVector& upsilon) {
  if (upsilon.kappa.size() != obs.p0() || upsilon.beta.size() != obs.p1() || upsilon.gamma.size() != obs.p2())
    throw InputError("parameter dimensions (" + std::to_string(upsilon.kappa.size()) + "," +
                     std::to_string(upsilon.beta.size()) + "," + std::to_string(upsilon.gamma.size()) +
                     ") do not match the design (" + std::to_string(obs.p0()) + "," + std::to_string(obs.p1()) +
                     "," + std::to_string(obs.p2()) + ")");
}

// ---------------------------------------------------------------- densities

namespace {

void check_mean_precision(double mu, double phi) {
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("mean must lie in (0,1)");
  if (!(phi > 0.0) || std::isinf(phi)) throw DomainError("precision must be positive and finite");
}

}  // namespace

double beta_log_density(double y, double mu, double phi) {
  if (!(y > 0.0 && y < 1.0)) throw DomainError("beta density is supported on (0,1) only");
  check_mean_precision(mu, phi);
  return -log_beta(mu * phi, (1.0 - mu) * phi) + (mu * phi - 1.0) * std::log(y) +
         ((1.0 - mu) * phi - 1.0) * std::log1p(-y);
}

double inflated_log_density(double y, int c, double theta, double mu, double phi) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("inflation probability must lie in (0,1)");
  if (y == static_cast<double>(c)) return std::log(theta);
  if (!(y > 0.0 && y < 1.0)) throw DomainError("response must lie in (0,1) or equal c");
  return std::log1p(-theta) + beta_log_density(y, mu, phi);
}

double logit_beta_log_density(double y_star, double mu, double phi) {
  check_mean_precision(mu, phi);
  return -log_beta(mu * phi, (1.0 - mu) * phi) - y_star * (1.0 - mu) * phi - phi * log1p_exp(-y_star);
}

ConditionalMoments conditional_moments(double mu, double phi) {
  check_mean_precision(mu, phi);
  const double dq = digamma((1.0 - mu) * phi);
  return {digamma(mu * phi) - dq, dq - digamma(phi)};
}

// ---------------------------------------------------------------- predictors

namespace {

Vector apply_inverse(const Matrix& design, const Vector& coef, const Link& link, bool clamp,
                     const char* submodel) {
  if (design.cols() != coef.size())
    throw InputError(std::string(submodel) + " coefficient length does not match its design");
  const Vector eta = design * coef;
  Vector out(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    double v = link.inverse(eta[i]);
    if (!std::isfinite(eta[i]) || !std::isfinite(v))
      throw NumericalError("non-finite " + std::string(submodel) + " predictor at row " + std::to_string(i + 1));
    if (clamp) v = std::clamp(v, kProbabilityFloor, 1.0 - kProbabilityFloor);
    out[i] = v;
  }
  return out;
}

}  // namespace

Vector discrete_probabilities(const ObservationSet& obs, const Link& link, const Vector& kappa, bool clamp) {
  return apply_inverse(obs.S(), kappa, link, clamp, "discrete (theta)");
}

Vector mean_predictor(const ObservationSet& obs, const Link& link, const Vector& beta, bool clamp) {
  return apply_inverse(obs.X(), beta, link, clamp, "mean (mu)");
}

Vector precision_predictor(const ObservationSet& obs, const Link& link, const Vector& gamma) {
  Vector phi = apply_inverse(obs.Z(), gamma, link, false, "precision (phi)");
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    if (!(phi[i] > 0.0))
      throw NumericalError("precision predictor underflows to zero at row " + std::to_string(i + 1));
  return phi;
}

Predictors linear_predictors(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon,
                             bool clamp_probabilities) {
  check_dimensions(obs, upsilon);
  return {discrete_probabilities(obs, links.theta, upsilon.kappa, clamp_probabilities),
          mean_predictor(obs, links.mu, upsilon.beta, clamp_probabilities),
          precision_predictor(obs, links.phi, upsilon.gamma)};
}

LogLikelihood log_likelihood(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon) {
  const Predictors pr = linear_predictors(obs, links, upsilon);
  CompensatedSum l1, l2;
  for (Eigen::Index i = 0; i < obs.n(); ++i)
    l1.add(obs.at_point_mass(i) ? std::log(pr.theta[i]) : std::log1p(-pr.theta[i]));
  for (const Eigen::Index i : obs.continuous_indices())
    l2.add(beta_log_density(obs.y()[i], pr.mu[i], pr.phi[i]));
  return {l1.value() + l2.value(), l1.value(), l2.value()};
}

}  // namespace ibreg
