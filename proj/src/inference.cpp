#include "ibreg/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ibreg/special.hpp"

namespace ibreg {

namespace {

// Inverts a symmetric positive definite matrix; on failure names the columns
// spanning the (near) null space.
Matrix checked_inverse(const Matrix& M, const std::vector<std::string>& names, const char* what) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  const Vector& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (!(top > 0.0) || !M.allFinite() || ev[0] <= 1e-12 * top) {
    std::ostringstream msg;
    msg << what << " matrix is singular; near-collinear columns:";
    const Vector v = es.eigenvectors().col(0).cwiseAbs();
    const double vmax = v.maxCoeff();
    for (Eigen::Index j = 0; j < v.size(); ++j)
      if (v[j] >= 0.1 * vmax) msg << ' ' << names[static_cast<std::size_t>(j)];
    throw NumericalError(msg.str());
  }
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

Matrix sandwich(const Matrix& bread, const Matrix& meat, const std::vector<std::string>& names, const char* what) {
  const Matrix inv = checked_inverse(bread, names, what);
  Matrix V = inv * meat * inv;
  return (V + V.transpose()) / 2.0;
}

std::vector<std::string> names_with_prefix(const char* prefix, Eigen::Index p, Eigen::Index offset = 1) {
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < p; ++j) out.push_back(std::string(prefix) + "[" + std::to_string(j + offset) + "]");
  return out;
}

std::vector<std::string> theta_names(Eigen::Index p1, Eigen::Index p2) {
  auto b = names_with_prefix("beta", p1);
  const auto g = names_with_prefix("gamma", p2);
  b.insert(b.end(), g.begin(), g.end());
  return b;
}

// Accumulates x x' w, x z' w, z z' w into the (beta, gamma) blocks.
void add_block(Matrix& M, const Eigen::Ref<const Eigen::RowVectorXd>& x, const Eigen::Ref<const Eigen::RowVectorXd>& z,
               double w, const ScoreMomentBlock& b) {
  const Eigen::Index p1 = x.size(), p2 = z.size();
  M.topLeftCorner(p1, p1).noalias() += (w * b.mm) * x.transpose() * x;
  M.topRightCorner(p1, p2).noalias() += (w * b.mp) * x.transpose() * z;
  M.bottomRightCorner(p2, p2).noalias() += (w * b.pp) * z.transpose() * z;
}

void symmetrize_blocks(Matrix& M, Eigen::Index p1) {
  const Eigen::Index p2 = M.rows() - p1;
  M.bottomLeftCorner(p2, p1) = M.topRightCorner(p1, p2).transpose();
}

// Rows and weights entering the continuous-part sums.
struct WeightedRows {
  std::vector<Eigen::Index> rows;
  std::vector<double> weights;
};

WeightedRows continuous_rows(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa,
                             ContinuousWeighting weighting) {
  WeightedRows out;
  if (weighting == ContinuousWeighting::subsample) {
    out.rows = obs.continuous_indices();
    out.weights.assign(out.rows.size(), 1.0);
    return out;
  }
  const Vector theta = discrete_probabilities(obs, links.theta, kappa);
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    out.rows.push_back(i);
    out.weights.push_back(1.0 - theta[i]);
  }
  return out;
}

void check_alpha(double a) {
  if (!(a >= 0.0 && a < 1.0)) throw DomainError("continuous tuning constant must lie in [0,1)");
}

}  // namespace

Matrix cov_discrete(const ObservationSet& obs, const LinkSpec& links, const Vector& kappa, double alpha_disc) {
  if (!(alpha_disc >= 0.0 && alpha_disc <= 1.0)) throw DomainError("discrete tuning constant must lie in [0,1]");
  const double a = alpha_disc;
  const Vector eta = obs.S() * kappa;
  Vector wa(obs.n()), wb(obs.n());
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    const BinaryProbability b = links.theta.binary(eta[i]);
    const double m = (1.0 + a) * (b.q * std::exp(a * b.log_p) + b.p * std::exp(a * b.log_q));
    const double base = b.dp * b.dp_pq;
    wa[i] = m * base;
    wb[i] = m * m * base;
  }
  const Matrix A = obs.S().transpose() * wa.asDiagonal() * obs.S();
  const Matrix B = obs.S().transpose() * wb.asDiagonal() * obs.S();
  return sandwich(A, B, names_with_prefix("kappa", obs.p0()), "discrete-part sensitivity");
}

std::pair<ScoreMomentBlock, ScoreMomentBlock> lsmle_blocks(double m, double pm, double a, const LinkSpec& links) {
  check_alpha(a);
  const double q = 1.0 - a;
  const double pw = pm / q;  // working precision
  const double ps = pw * (1.0 + a);
  const double lb_w = log_beta(m * pw, (1.0 - m) * pw);
  const double lb_m = log_beta(m * pm, (1.0 - m) * pm);
  const double b1 = std::exp(q * lb_w - lb_m);
  const double b2 = std::exp(log_beta(m * ps, (1.0 - m) * ps) - 2.0 * a * lb_w - lb_m);
  const double tm = 1.0 / links.mu.derivative(m);
  const double tp = 1.0 / links.phi.derivative(pm);
  const double t1 = trigamma(m * pw), t2 = trigamma((1.0 - m) * pw);
  const double s1 = trigamma(m * ps), s2 = trigamma((1.0 - m) * ps);
  const double v = t1 + t2, v_s = s1 + s2;
  const double c = pw * (m * t1 - (1.0 - m) * t2);
  const double c_s = pw * (m * s1 - (1.0 - m) * s2);
  const double d = m * m * t1 + (1.0 - m) * (1.0 - m) * t2 - trigamma(pw);
  const double d_s = m * m * s1 + (1.0 - m) * (1.0 - m) * s2 - trigamma(ps);
  return {ScoreMomentBlock{q * b1 * tm * tm * pw * pw * v, b1 * tm * tp * c, b1 * tp * tp * d / q},
          ScoreMomentBlock{b2 * tm * tm * pw * pw * v_s, b2 * tm * tp * c_s / q, b2 * tp * tp * d_s / (q * q)}};
}

Matrix cov_mlse(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon, double alpha_cont,
                ContinuousWeighting weighting) {
  check_dimensions(obs, upsilon);
  check_alpha(alpha_cont);
  const double a = alpha_cont;
  const Eigen::Index p1 = obs.p1(), p2 = obs.p2(), p = p1 + p2;
  const Vector mu = mean_predictor(obs, links.mu, upsilon.beta);
  const Vector phi = precision_predictor(obs, links.phi, upsilon.gamma);
  const WeightedRows wr = continuous_rows(obs, links, upsilon.kappa, weighting);
  Matrix J = Matrix::Zero(p, p), K = Matrix::Zero(p, p);
  for (std::size_t k = 0; k < wr.rows.size(); ++k) {
    const Eigen::Index i = wr.rows[k];
    const auto [j, kk] = lsmle_blocks(mu[i], phi[i], a, links);
    add_block(J, obs.X().row(i), obs.Z().row(i), wr.weights[k], j);
    add_block(K, obs.X().row(i), obs.Z().row(i), wr.weights[k], kk);
  }
  symmetrize_blocks(J, p1);
  symmetrize_blocks(K, p1);
  return sandwich(J, K, theta_names(p1, p2), "continuous-part sensitivity");
}

ScoreMomentBlock lmdpde_score_moments(double mu, double phi, double power, const LinkSpec& links) {
  const double k = power_integral(mu, phi, power);
  const double pa = phi * power;
  const ConditionalMoments base = conditional_moments(mu, phi);
  const ConditionalMoments sh = conditional_moments(mu, pa);
  const double ds = sh.mu_star - base.mu_star;
  const double dd = sh.mu_dagger - base.mu_dagger;
  const double t1 = trigamma(mu * pa), t2 = trigamma((1.0 - mu) * pa);
  const double v = t1 + t2;
  const double gm = links.mu.derivative(mu), gp = links.phi.derivative(phi);
  const double shift = mu * ds + dd;
  return {phi * phi * k / (gm * gm) * (v + ds * ds),
          phi * k / (gm * gp) * (mu * (v + ds * ds) - t2 + ds * dd),
          k / (gp * gp) * (mu * mu * t1 + (1.0 - mu) * (1.0 - mu) * t2 - trigamma(pa) + shift * shift)};
}

Matrix cov_mlme(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon, double alpha_cont,
                ContinuousWeighting weighting) {
  check_dimensions(obs, upsilon);
  check_alpha(alpha_cont);
  const double a = alpha_cont;
  const Eigen::Index p1 = obs.p1(), p2 = obs.p2(), p = p1 + p2;
  const Vector mu = mean_predictor(obs, links.mu, upsilon.beta);
  const Vector phi = precision_predictor(obs, links.phi, upsilon.gamma);
  const WeightedRows wr = continuous_rows(obs, links, upsilon.kappa, weighting);
  Matrix L = Matrix::Zero(p, p), O = Matrix::Zero(p, p);
  for (std::size_t k = 0; k < wr.rows.size(); ++k) {
    const Eigen::Index i = wr.rows[k];
    const ScoreMomentBlock bread = lmdpde_score_moments(mu[i], phi[i], 1.0 + a, links);
    const ScoreMomentBlock outer = lmdpde_score_moments(mu[i], phi[i], 1.0 + 2.0 * a, links);
    const PredictorScore e = lmdpde_expectation(mu[i], phi[i], a, links);
    const ScoreMomentBlock meat{outer.mm - e.mean * e.mean, outer.mp - e.mean * e.precision,
                                outer.pp - e.precision * e.precision};
    add_block(L, obs.X().row(i), obs.Z().row(i), wr.weights[k], bread);
    add_block(O, obs.X().row(i), obs.Z().row(i), wr.weights[k], meat);
  }
  symmetrize_blocks(L, p1);
  symmetrize_blocks(O, p1);
  return sandwich(L, O, theta_names(p1, p2), "continuous-part sensitivity");
}

CovarianceResult covariance(const ObservationSet& obs, const LinkSpec& links, EstimatorKind kind,
                            const ParamVector& upsilon, const TuningConstants& alpha, ContinuousWeighting weighting) {
  const Eigen::Index p0 = obs.p0(), pt = obs.p1() + obs.p2();
  const double ad = kind == EstimatorKind::mle ? 0.0 : alpha.alpha_disc;
  const double ac = kind == EstimatorKind::mle ? 0.0 : alpha.alpha_cont;
  CovarianceResult out;
  out.V = Matrix::Zero(p0 + pt, p0 + pt);
  out.V.topLeftCorner(p0, p0) = cov_discrete(obs, links, upsilon.kappa, ad);
  out.V.bottomRightCorner(pt, pt) = kind == EstimatorKind::mlme ? cov_mlme(obs, links, upsilon, ac, weighting)
                                                                 : cov_mlse(obs, links, upsilon, ac, weighting);
  out.se = out.V.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

WaldTest wald_test(double estimate, double se, double null_value) {
  if (!(se > 0.0) || !std::isfinite(se)) throw DomainError("Wald test needs a positive standard error");
  WaldTest w;
  w.null_value = null_value;
  w.z = (estimate - null_value) / se;
  w.statistic = w.z * w.z;
  w.p_value = chisq1_survival(w.statistic);
  return w;
}

WaldTest wald_test(const FitResult& fit, Eigen::Index index, double null_value) {
  const Vector est = fit.estimate.flat();
  if (index < 0 || index >= est.size()) throw InputError("Wald test index out of range");
  if (fit.se.size() != est.size()) throw InputError("fit has no standard errors");
  WaldTest w = wald_test(est[index], fit.se[index], null_value);
  w.index = index;
  return w;
}

std::vector<std::string> default_parameter_names(Eigen::Index p0, Eigen::Index p1, Eigen::Index p2) {
  auto out = names_with_prefix("kappa", p0);
  const auto t = theta_names(p1, p2);
  out.insert(out.end(), t.begin(), t.end());
  return out;
}

}  // namespace ibreg
