#pragma once

// Zero-or-one inflated beta regression: data model, links and densities.

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ibreg/errors.hpp"

namespace ibreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class LinkKind { logit, log, cloglog };

/// x = g^{-1}(eta) and 1 - x with their logs, dx/deta and (dx/deta) / (x (1 - x)).
struct BinaryProbability {
  double p, q, log_p, log_q, dp, dp_pq;
};

/// Link function g with its inverse and first derivative g'.
class Link {
 public:
  constexpr explicit Link(LinkKind kind = LinkKind::logit) noexcept : kind_(kind) {}

  /// Looks up "logit", "log" or "cloglog".
  static Link from_name(std::string_view name);

  LinkKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;

  double evaluate(double x) const;
  double inverse(double eta) const;
  /// g'(x) on the parameter scale.
  double derivative(double x) const;
  /// Inverse on the unit interval, accurate near both ends.
  BinaryProbability binary(double eta) const;

  friend bool operator==(const Link&, const Link&) = default;

 private:
  LinkKind kind_;
};

/// Per-submodel links; defaults logit / logit / log.
struct LinkSpec {
  Link theta{LinkKind::logit};
  Link mu{LinkKind::logit};
  Link phi{LinkKind::log};

  friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
};

/// Responses on (0,1) plus a point mass at c, with the three design matrices.
/// Immutable once built; the continuous index set and the transformed
/// responses y* = logit(y), y-dagger = log(1 - y) are computed up front and
/// are exactly zero outside the continuous subsample.
class ObservationSet {
 public:
  ObservationSet(int c, Vector y, Matrix S, Matrix X, Matrix Z);

  int c() const noexcept { return c_; }
  Eigen::Index n() const noexcept { return y_.size(); }
  Eigen::Index p0() const noexcept { return S_.cols(); }
  Eigen::Index p1() const noexcept { return X_.cols(); }
  Eigen::Index p2() const noexcept { return Z_.cols(); }

  const Vector& y() const noexcept { return y_; }
  const Matrix& S() const noexcept { return S_; }
  const Matrix& X() const noexcept { return X_; }
  const Matrix& Z() const noexcept { return Z_; }

  /// Indicator y^c_i = 1{y_i = c}.
  const Vector& indicator() const noexcept { return yc_; }
  /// Ordered indices of the observations strictly inside (0,1).
  const std::vector<Eigen::Index>& continuous_indices() const noexcept { return wp_; }
  Eigen::Index n_dagger() const noexcept { return static_cast<Eigen::Index>(wp_.size()); }
  const Vector& y_star() const noexcept { return y_star_; }
  const Vector& y_dagger() const noexcept { return y_dagger_; }

  bool at_point_mass(Eigen::Index i) const noexcept { return yc_[i] != 0.0; }

  /// Keeps the listed rows, in order.
  ObservationSet select_rows(const std::vector<Eigen::Index>& rows) const;

 private:
  int c_;
  Vector y_;
  Matrix S_, X_, Z_;
  Vector yc_;
  std::vector<Eigen::Index> wp_;
  Vector y_star_, y_dagger_;
};

struct ParamVector {
  Vector kappa;
  Vector beta;
  Vector gamma;

  Eigen::Index size() const noexcept { return kappa.size() + beta.size() + gamma.size(); }
  /// (beta, gamma) stacked.
  Vector theta() const;
  /// (kappa, beta, gamma) stacked.
  Vector flat() const;
  static ParamVector from_flat(const Vector& v, Eigen::Index p0, Eigen::Index p1, Eigen::Index p2);
  static ParamVector from_parts(const Vector& kappa, const Vector& theta, Eigen::Index p1);
};

void check_dimensions(const ObservationSet& obs, const ParamVector& upsilon);

double beta_log_density(double y, double mu, double phi);

/// log bi_c(y; theta, mu, phi).
double inflated_log_density(double y, int c, double theta, double mu, double phi);

/// Log density of y* = logit(Y) with Y ~ beta(mu, phi).
double logit_beta_log_density(double y_star, double mu, double phi);

struct ConditionalMoments {
  double mu_star;    ///< E[Y*]     = psi(mu phi) - psi((1 - mu) phi)
  double mu_dagger;  ///< E[log(1-Y)] = psi((1 - mu) phi) - psi(phi)
};

ConditionalMoments conditional_moments(double mu, double phi);

struct Predictors {
  Vector theta;
  Vector mu;
  Vector phi;
};

/// Floor applied to theta and mu while optimizing; never to reported values.
inline constexpr double kProbabilityFloor = 1e-12;

/// Inverse-link evaluation of the three linear predictors. With
/// `clamp_probabilities` the theta and mu values are kept inside
/// [1e-12, 1 - 1e-12].
Predictors linear_predictors(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon,
                             bool clamp_probabilities = false);

Vector discrete_probabilities(const ObservationSet& obs, const Link& link, const Vector& kappa,
                              bool clamp_probabilities = false);
Vector mean_predictor(const ObservationSet& obs, const Link& link, const Vector& beta,
                      bool clamp_probabilities = false);
Vector precision_predictor(const ObservationSet& obs, const Link& link, const Vector& gamma);

struct LogLikelihood {
  double total;
  double discrete;    ///< Bernoulli part over all observations
  double continuous;  ///< beta part over the continuous subsample
};

LogLikelihood log_likelihood(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon);

}  // namespace ibreg
