#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "ibreg/inference.hpp"
#include "ibreg/simulation.hpp"
#include "ibreg/special.hpp"

using namespace ibreg;

namespace {

const LinkSpec kLinks;

double rel_diff(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

// Fisher information of the beta part, weighted by 1 - theta over all rows.
Matrix beta_information(const ObservationSet& obs, const ParamVector& u) {
  const Predictors p = linear_predictors(obs, kLinks, u);
  const Eigen::Index p1 = obs.p1(), p2 = obs.p2();
  Matrix I = Matrix::Zero(p1 + p2, p1 + p2);
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    const double mu = p.mu[i], phi = p.phi[i], w = 1 - p.theta[i];
    const double t1 = trigamma(mu * phi), t2 = trigamma((1 - mu) * phi);
    const double gm = kLinks.mu.derivative(mu), gp = kLinks.phi.derivative(phi);
    const double mm = phi * phi * (t1 + t2) / (gm * gm);
    const double mp = phi * (mu * t1 - (1 - mu) * t2) / (gm * gp);
    const double pp = (mu * mu * t1 + (1 - mu) * (1 - mu) * t2 - trigamma(phi)) / (gp * gp);
    const Vector x = obs.X().row(i).transpose(), z = obs.Z().row(i).transpose();
    I.topLeftCorner(p1, p1) += w * mm * x * x.transpose();
    I.topRightCorner(p1, p2) += w * mp * x * z.transpose();
    I.bottomRightCorner(p2, p2) += w * pp * z * z.transpose();
  }
  I.bottomLeftCorner(p2, p1) = I.topRightCorner(p1, p2).transpose();
  return I;
}

ParamVector params() {
  ParamVector u;
  u.kappa = (Vector(2) << -0.4, 0.6).finished();
  u.beta = (Vector(2) << -0.3, 0.7).finished();
  u.gamma = (Vector(2) << 2.2, 0.4).finished();
  return u;
}

}  // namespace

TEST_CASE("discrete covariance") {
  const ObservationSet obs = fixtures::small_sample();
  const Vector k = params().kappa;
  const Vector t = discrete_probabilities(obs, kLinks.theta, k);
  const Matrix info = obs.S().transpose() * (t.array() * (1 - t.array())).matrix().asDiagonal() * obs.S();
  CHECK(rel_diff(cov_discrete(obs, kLinks, k, 0.0), info.inverse()) < 1e-10);

  // intercept only, n = 4, theta = 0.5, alpha = 1: M = 1 and V = 1
  Matrix one = Matrix::Ones(4, 1);
  Vector y(4);
  y << 0, 0.3, 0.5, 0.7;
  const ObservationSet tiny(0, y, one, one, one);
  CHECK(cov_discrete(tiny, kLinks, Vector::Zero(1), 1.0)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("continuous covariances collapse to the inverse information at alpha = 0") {
  const ObservationSet obs = fixtures::small_sample();
  const ParamVector u = params();
  const Matrix inv = beta_information(obs, u).inverse();
  CHECK(rel_diff(cov_mlse(obs, kLinks, u, 0.0), inv) < 1e-8);
  CHECK(rel_diff(cov_mlme(obs, kLinks, u, 0.0), inv) < 1e-8);
}

TEST_CASE("covariance structure") {
  const ObservationSet obs = fixtures::small_sample();
  const ParamVector u = params();
  for (auto kind : {EstimatorKind::mle, EstimatorKind::mlse, EstimatorKind::mlme}) {
    const CovarianceResult c = covariance(obs, kLinks, kind, u, {0.3, 0.2});
    CHECK(c.V.topRightCorner(2, 4).cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.V.bottomLeftCorner(4, 2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((c.V - c.V.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(c.V).eigenvalues().minCoeff() >= -1e-10);
    CHECK(c.se.size() == 6);
  }
}

TEST_CASE("scale equivariance of standard errors") {
  const ObservationSet obs = fixtures::small_sample();
  const ParamVector u = params();
  Matrix X2 = obs.X();
  X2.col(1) *= 4.0;
  const ObservationSet scaled(obs.c(), obs.y(), obs.S(), X2, obs.Z());
  ParamVector u2 = u;
  u2.beta[1] /= 4.0;
  for (double a : {0.0, 0.2}) {
    const double se = std::sqrt(cov_mlse(obs, kLinks, u, a)(1, 1));
    const double se2 = std::sqrt(cov_mlse(scaled, kLinks, u2, a)(1, 1));
    CHECK(se2 == doctest::Approx(se / 4).epsilon(1e-10));
    const double me = std::sqrt(cov_mlme(obs, kLinks, u, a)(1, 1));
    const double me2 = std::sqrt(cov_mlme(scaled, kLinks, u2, a)(1, 1));
    CHECK(me2 == doctest::Approx(me / 4).epsilon(1e-10));
  }
}

TEST_CASE("LMDPDE score moments against quadrature") {
  for (auto [mu, phi] : {std::pair{0.3, 7.0}, std::pair{0.8, 40.0}, std::pair{0.5, 1.5}}) {
    for (double a : {1.0, 1.2, 1.6}) {
      const ScoreMomentBlock b = lmdpde_score_moments(mu, phi, a, kLinks);
      QuadratureSpec s;
      auto moment = [&](int which) {
        return integrate(
            [&](double t) {
              const PredictorScore u = logit_beta_score(t, mu, phi, kLinks);
              const double w = std::exp(a * logit_beta_log_density(t, mu, phi));
              const double v = which == 0 ? u.mean * u.mean : which == 1 ? u.mean * u.precision
                                                                           : u.precision * u.precision;
              return v * w;
            },
            s);
      };
      CHECK(b.mm == doctest::Approx(moment(0)).epsilon(1e-7));
      CHECK(b.mp == doctest::Approx(moment(1)).epsilon(1e-7));
      CHECK(b.pp == doctest::Approx(moment(2)).epsilon(1e-7));
    }
  }
}

TEST_CASE("LSMLE sensitivity and variability blocks against quadrature") {
  for (auto [mu, phi] : {std::pair{0.3, 7.0}, std::pair{0.75, 30.0}}) {
    for (double a : {0.0, 0.1, 0.3}) {
      CAPTURE(a);
      const auto [J, K] = lsmle_blocks(mu, phi, a, kLinks);
      QuadratureSpec s;
      auto model = [&](double t) { return std::exp(logit_beta_log_density(t, mu, phi)); };
      // J = -E d/d eta of the contribution, by central differences in the predictors
      const double h = 1e-5;
      auto deriv = [&](double t, int wrt) {
        const double em = kLinks.mu.evaluate(mu), ep = kLinks.phi.evaluate(phi);
        auto at = [&](double dm, double dp) {
          return lsmle_contribution(t, kLinks.mu.inverse(em + dm), kLinks.phi.inverse(ep + dp), a, kLinks);
        };
        const PredictorScore up = wrt == 0 ? at(h, 0) : at(0, h);
        const PredictorScore dn = wrt == 0 ? at(-h, 0) : at(0, -h);
        return PredictorScore{(up.mean - dn.mean) / (2 * h), (up.precision - dn.precision) / (2 * h)};
      };
      const double jmm = -integrate([&](double t) { return deriv(t, 0).mean * model(t); }, s);
      const double jmp = -integrate([&](double t) { return deriv(t, 1).mean * model(t); }, s);
      const double jpp = -integrate([&](double t) { return deriv(t, 1).precision * model(t); }, s);
      CHECK(J.mm == doctest::Approx(jmm).epsilon(1e-6));
      CHECK(J.mp == doctest::Approx(jmp).epsilon(1e-6));
      CHECK(J.pp == doctest::Approx(jpp).epsilon(1e-6));

      // K as used omits the mean-shift terms of the second moment; add them back
      const double kmm = integrate([&](double t) { auto u = lsmle_contribution(t, mu, phi, a, kLinks); return u.mean * u.mean * model(t); }, s);
      const double kmp = integrate([&](double t) { auto u = lsmle_contribution(t, mu, phi, a, kLinks); return u.mean * u.precision * model(t); }, s);
      const double kpp = integrate([&](double t) { auto u = lsmle_contribution(t, mu, phi, a, kLinks); return u.precision * u.precision * model(t); }, s);
      const double q = 1 - a, pw = phi / q, ps = pw * (1 + a);
      const ConditionalMoments mw = conditional_moments(mu, pw), ms = conditional_moments(mu, ps);
      const double ds = ms.mu_star - mw.mu_star, dd = ms.mu_dagger - mw.mu_dagger;
      const double b2 = std::exp(log_beta(mu * ps, (1 - mu) * ps) - 2 * a * log_beta(mu * pw, (1 - mu) * pw) -
                                 log_beta(mu * phi, (1 - mu) * phi));
      const double tm = 1 / kLinks.mu.derivative(mu), tp = 1 / kLinks.phi.derivative(phi);
      CHECK(K.mm + b2 * tm * tm * pw * pw * ds * ds == doctest::Approx(kmm).epsilon(1e-6));
      CHECK(K.mp + b2 * tm * tp * pw * (mu * ds * ds + ds * dd) / q == doctest::Approx(kmp).epsilon(1e-6));
      CHECK(K.pp + b2 * tp * tp * (mu * ds + dd) * (mu * ds + dd) / (q * q) == doctest::Approx(kpp).epsilon(1e-6));
      if (a == 0.0) {
        CHECK(K.mm == doctest::Approx(J.mm).epsilon(1e-12));
        CHECK(K.pp == doctest::Approx(J.pp).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("singular information names the columns") {
  const ObservationSet base = fixtures::small_sample();
  Matrix Z(base.n(), 2);
  Z.col(0).setOnes();
  Z.col(1).setConstant(3.0);
  const ObservationSet obs(0, base.y(), base.S(), base.X(), Z);
  ParamVector u = params();
  u.gamma << 2.0, 0.0;
  CHECK_THROWS_WITH_AS(cov_mlse(obs, kLinks, u, 0.0), doctest::Contains("gamma[2]"), NumericalError);
}

TEST_CASE("Wald tests") {
  const WaldTest zero = wald_test(1.0, 0.5, 1.0);
  CHECK(zero.statistic == 0.0);
  CHECK(zero.p_value == 1.0);
  const WaldTest w = wald_test(1.959963984540054 * 0.3, 0.3, 0.0);
  CHECK(w.p_value == doctest::Approx(0.05).epsilon(1e-10));
  CHECK_THROWS_AS(wald_test(1.0, 0.0, 0.0), DomainError);
  // estimate -0.267 with se 0.096
  const WaldTest pop = wald_test(-0.267, 0.096, 0.0);
  CHECK(std::round(pop.p_value * 1000) / 1000 == doctest::Approx(0.005));
  CHECK(pop.z == doctest::Approx(-2.78125).epsilon(1e-12));
  const WaldTest printed = wald_test(-2.774, 1.0, 0.0);
  CHECK(std::round(printed.p_value * 1000) / 1000 == doctest::Approx(0.006));
}
