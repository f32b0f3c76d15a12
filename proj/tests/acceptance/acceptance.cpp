// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ibreg/diagnostics.hpp"
#include "ibreg/inference.hpp"
#include "ibreg/io.hpp"
#include "ibreg/simulation.hpp"
#include "ibreg/special.hpp"

#ifndef IBREG_SOURCE_DIR
#define IBREG_SOURCE_DIR "."
#endif

using namespace ibreg;

namespace {

// Coordinates in (kappa[1..3], beta[1..2], gamma[1]) order.
constexpr int kK2 = 1, kK3 = 2, kB1 = 3, kB2 = 4, kG = 5;

int failures = 0;

struct Line {
  std::ostringstream detail;
  bool ok = true;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

void report(const char* id, const char* title, Line& l, double seconds) {
  std::printf("criterion %-3s %-44s %s (%.1f s)%s\n", id, title, l.ok ? "PASS" : "FAIL", seconds,
              l.detail.str().c_str());
  std::fflush(stdout);
  if (!l.ok) ++failures;
}

template <class F>
void run(const char* id, const char* title, F body) {
  const auto t0 = std::chrono::steady_clock::now();
  Line l;
  try {
    body(l);
  } catch (const std::exception& e) {
    l.ok = false;
    l.detail << " [exception: " << e.what() << "]";
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, title, l, s);
}

std::string num(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
    Vector a = x, b = x;
    a[j] += h;
    b[j] -= h;
    g[j] = (f(a) - f(b)) / (a[j] - b[j]);
  }
  return g;
}

double rel_err(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

double alpha_zero_fraction(const MonteCarloSummary& m, EstimatorKind k, bool disc) {
  int zero = 0, total = 0;
  for (const auto& r : m.records)
    if (!r.contaminated && r.estimator == k && r.converged) {
      ++total;
      if ((disc ? r.alpha.alpha_disc : r.alpha.alpha_cont) == 0.0) ++zero;
    }
  return total ? static_cast<double>(zero) / total : 0.0;
}

void check_reliable(Line& l, const MonteCarloSummary& m) {
  for (const auto& e : m.estimators)
    l.require(e.reliable, std::string(estimator_name(e.estimator)) + " failures above 1%");
}

}  // namespace

int main() {
  const Dgp dgp = default_dgp();
  const LinkSpec links = dgp.links;

  run("1", "alpha = 0 reproduces maximum likelihood", [&](Line& l) {
    double worst = 0.0;
    for (int d = 0; d < 20; ++d) {
      Rng rng = substream(101, static_cast<std::uint64_t>(d));
      const ObservationSet obs = generate_clean(100, dgp, rng);
      FitOptions fo;
      fo.covariance = false;
      const FitResult ml = fit(obs, fo);
      l.require(ml.converged(), "mle converged");
      const Vector ref = ml.estimate.flat();
      for (auto k : {EstimatorKind::mlse, EstimatorKind::mlme}) {
        fo.estimator = k;
        fo.alpha = {0.0, 0.0};
        worst = std::max(worst, (fit(obs, fo).estimate.flat() - ref).cwiseAbs().maxCoeff());
      }
      // solve the robust estimating equations at alpha = 0 directly, from the default start
      const ParamVector s = default_start(obs, links);
      const double n = static_cast<double>(obs.n());
      auto disc = [&](const Vector& k, Vector* g) {
        if (g) *g = -mdpde_disc_estfun(obs, links, k, 0.0) / n;
        return mdpde_disc_objective(obs, links, k, 0.0);
      };
      auto ls = [&](const Vector& t, Vector* g) {
        if (g) *g = -lsmle_estfun(obs, links, t, 0.0) / n;
        return -lsmle_objective(obs, links, t, 0.0) / n;
      };
      auto lm = [&](const Vector& t, Vector* g) {
        if (g) *g = -lmdpde_estfun(obs, links, t, 0.0) / n;
        return lmdpde_objective(obs, links, t, 0.0);
      };
      const OptimizationResult rk = minimize(disc, s.kappa);
      const OptimizationResult rs = minimize(ls, s.theta());
      const OptimizationResult rm = minimize(lm, s.theta());
      l.require(rk.report.converged && rs.report.converged && rm.report.converged, "direct solves converged");
      worst = std::max(worst, (rk.x - ml.estimate.kappa).cwiseAbs().maxCoeff());
      worst = std::max(worst, (rs.x - ml.estimate.theta()).cwiseAbs().maxCoeff());
      worst = std::max(worst, (rm.x - ml.estimate.theta()).cwiseAbs().maxCoeff());
    }
    l.detail << " max |difference| " << worst << " over 20 datasets, n = 100 (tol 1e-6)";
    l.require(worst <= 1e-6, "max difference <= 1e-6");
  });

  run("2", "estimating functions match objective gradients", [&](Line& l) {
    Rng rng = substream(202, 0);
    ObservationSet obs = generate_clean(200, dgp, rng);
    obs = contaminate_continuous(contaminate_discrete(obs, dgp, 0.05, rng), dgp, 0.05, rng);
    const double n = static_cast<double>(obs.n());
    std::normal_distribution<double> nd(0.0, 0.3);
    std::uniform_real_distribution<double> ud(0.05, 0.6);
    double worst[5] = {0, 0, 0, 0, 0};
    for (int k = 0; k < 10; ++k) {
      Vector kap = dgp.truth.kappa, th = dgp.truth.theta();
      for (auto& v : kap) v += nd(rng);
      for (auto& v : th) v += nd(rng);
      const double a = ud(rng);
      auto bl = [&](const Vector& x) { return bernoulli_log_likelihood(obs, links, x); };
      auto be = [&](const Vector& x) { return beta_log_likelihood(obs, links, x); };
      auto md = [&](const Vector& x) { return mdpde_disc_objective(obs, links, x, a); };
      auto ls = [&](const Vector& x) { return lsmle_objective(obs, links, x, a); };
      auto lm = [&](const Vector& x) { return lmdpde_objective(obs, links, x, a); };
      Vector score(kap.size() + th.size()), fd(kap.size() + th.size());
      score << bernoulli_score(obs, links, kap), beta_score(obs, links, th);
      fd << central_difference(bl, kap), central_difference(be, th);
      worst[0] = std::max(worst[0], rel_err(score, fd));
      worst[1] = std::max(worst[1], rel_err(mdpde_disc_estfun(obs, links, kap, a), -n * central_difference(md, kap)));
      worst[2] = std::max(worst[2], rel_err(lsmle_estfun(obs, links, th, a), central_difference(ls, th)));
      worst[3] = std::max(worst[3], rel_err(lmdpde_estfun(obs, links, th, a), -(n / (1 + a)) * central_difference(lm, th)));
      const EstimatingFunctionValue u = mle_score(obs, links, ParamVector::from_parts(kap, th, obs.p1()));
      Vector joint(kap.size() + th.size());
      joint << u.u_kappa, u.u_theta;
      worst[4] = std::max(worst[4], rel_err(joint, fd));
    }
    const char* names[] = {"mle", "mdpde", "lsmle", "lmdpde", "mle joint"};
    for (int k = 0; k < 5; ++k) {
      l.detail << ' ' << names[k] << ' ' << worst[k];
      l.require(worst[k] < 1e-5, std::string(names[k]) + " relative error < 1e-5");
    }
  });

  const double mus[] = {0.1, 0.5, 0.85};
  const double phis[] = {0.8, 5.0, 60.0};
  const double alphas[] = {0.1, 0.3, 0.6};

  run("3", "Fisher consistency", [&](Line& l) {
    const Matrix one = Matrix::Ones(4, 1);
    double disc = 0.0;
    for (int c : {0, 1}) {
      const double y_in = 0.4;
      Vector ya(4), yb(4);
      ya << c, y_in, y_in, y_in;
      yb << c, c, c, y_in;
      const ObservationSet oa(c, ya, one, one, one), ob(c, yb, one, one, one);
      for (int k = 1; k <= 9; ++k) {
        const double t = 0.1 * k;
        const Vector kap = Vector::Constant(1, logit(t));
        for (double a : {0.0, 0.3, 1.0}) {
          const double sa = mdpde_disc_estfun(oa, links, kap, a)[0];  // U(c) + 3 U(other)
          const double sb = mdpde_disc_estfun(ob, links, kap, a)[0];  // 3 U(c) + U(other)
          const double uc = (3 * sb - sa) / 8, uo = (3 * sa - sb) / 8;
          disc = std::max(disc, std::abs(t * uc + (1 - t) * uo) / std::max(1.0, std::abs(uc) + std::abs(uo)));
        }
      }
    }
    l.detail << " discrete two-point max " << disc;
    l.require(disc <= 1e-12, "discrete identity exact (1e-12)");

    double lsm = 0.0, lmd = 0.0;
    QuadratureSpec q;
    for (double mu : mus)
      for (double phi : phis)
        for (double a : alphas) {
          auto dens = [&](double t) { return std::exp(logit_beta_log_density(t, mu, phi)); };
          auto ls = [&](bool prec) {
            return integrate(
                [&](double t) {
                  const PredictorScore u = lsmle_contribution(t, mu, phi, a, links);
                  return (prec ? u.precision : u.mean) * dens(t);
                },
                q);
          };
          auto lm = [&](bool prec) {
            return integrate(
                [&](double t) {
                  const PredictorScore u = logit_beta_score(t, mu, phi, links);
                  return (prec ? u.precision : u.mean) * std::exp((1 + a) * logit_beta_log_density(t, mu, phi));
                },
                q);
          };
          lsm = std::max({lsm, std::abs(ls(false)), std::abs(ls(true))});
          const PredictorScore e = lmdpde_expectation(mu, phi, a, links);
          lmd = std::max({lmd, std::abs(lm(false) - e.mean), std::abs(lm(true) - e.precision)});
        }
    l.detail << "; LSMLE mean " << lsm << ", LMDPDE centring " << lmd << " over 27 (mu, phi, alpha) incl. mu phi < 1";
    l.require(lsm <= 1e-6, "LSMLE unbiased within 1e-6");
    l.require(lmd <= 1e-6, "LMDPDE centring within 1e-6");
  });

  run("4", "closed-form power integral", [&](Line& l) {
    double worst = 0.0;
    QuadratureSpec q;
    for (double mu : mus)
      for (double phi : phis)
        for (double a : alphas) {
          const double quad =
              integrate([&](double t) { return std::exp((1 + a) * logit_beta_log_density(t, mu, phi)); }, q);
          worst = std::max(worst, std::abs(power_integral(mu, phi, 1 + a) - quad) / quad);
        }
    const double spot = power_integral(0.5, 2.0, 1.5);
    l.detail << " max relative error " << worst << "; K(0.5, 2, 0.5) - pi/8 = " << spot - std::numbers::pi / 8;
    l.require(worst <= 1e-8, "quadrature agreement 1e-8");
    l.require(std::abs(spot - std::numbers::pi / 8) <= 1e-12, "pi/8 spot value");
  });

  run("5", "scenario 1 bias (n = 100, 300 reps)", [&](Line& l) {
    ScenarioSpec s = scenario(1, 100, 300, 505);
    s.compute_se = false;
    s.fit_clean = false;
    const MonteCarloSummary m = run_monte_carlo(s);
    check_reliable(l, m);
    const Vector& b = m.find(EstimatorKind::mle, true).bias;
    l.detail << " mle bias gamma " << num(b[kG]) << " beta2 " << num(b[kB2]);
    l.require(b[kG] <= -1.6, "mle gamma bias <= -1.6");
    l.require(b[kB2] >= 0.9, "mle beta2 bias >= 0.9");
    for (auto k : {EstimatorKind::mlse, EstimatorKind::mlme}) {
      const Vector& r = m.find(k, true).bias;
      l.detail << "; " << estimator_name(k) << " beta1 " << num(r[kB1]) << " beta2 " << num(r[kB2]) << " gamma "
               << num(r[kG]);
      for (int j : {kB1, kB2, kG})
        l.require(std::abs(r[j]) <= 0.15, std::string(estimator_name(k)) + " |bias| <= 0.15");
    }
  });

  run("6", "scenario 2 bias (n = 100, 300 reps)", [&](Line& l) {
    ScenarioSpec s = scenario(2, 100, 300, 606);
    s.compute_se = false;
    s.fit_clean = false;
    const MonteCarloSummary m = run_monte_carlo(s);
    check_reliable(l, m);
    const Vector& b = m.find(EstimatorKind::mle, true).bias;
    l.detail << " mle bias kappa2 " << num(b[kK2]) << " kappa3 " << num(b[kK3]);
    l.require(b[kK2] <= -1.4 && b[kK3] <= -1.4, "mle kappa2, kappa3 bias <= -1.4");
    for (auto k : {EstimatorKind::mlse, EstimatorKind::mlme}) {
      const Vector& r = m.find(k, true).bias;
      l.detail << "; " << estimator_name(k) << " kappa " << num(r[0]) << ' ' << num(r[kK2]) << ' ' << num(r[kK3]);
      for (int j = 0; j < 3; ++j)
        l.require(std::abs(r[j]) <= 0.2, std::string(estimator_name(k)) + " |bias| <= 0.2");
    }
  });

  MonteCarloSummary s3;
  bool have_s3 = false;
  run("7", "tuning constants selected (n = 200, 200 reps)", [&](Line& l) {
    ScenarioSpec s = scenario(3, 200, 200, 707);
    s.compute_se = false;
    s3 = run_monte_carlo(s);
    have_s3 = true;
    check_reliable(l, s3);
    for (auto k : {EstimatorKind::mlse, EstimatorKind::mlme}) {
      const double zd = alpha_zero_fraction(s3, k, true), zc = alpha_zero_fraction(s3, k, false);
      const EstimatorSummary& e = s3.find(k, true);
      l.detail << ' ' << estimator_name(k) << ": clean alpha = 0 in " << num(zd, 3) << " / " << num(zc, 3)
               << ", contaminated mean alpha " << num(e.alpha_disc_mean) << " / " << num(e.alpha_cont_mean) << ';';
      l.require(zd >= 0.9 && zc >= 0.9, "clean alpha = 0 in >= 90%");
      l.require(e.alpha_disc_mean >= 0.20 && e.alpha_disc_mean <= 0.36, "discrete mean alpha in [0.20, 0.36]");
      l.require(e.alpha_cont_mean >= 0.07 && e.alpha_cont_mean <= 0.16, "continuous mean alpha in [0.07, 0.16]");
    }
  });

  run("8", "scenario 3 total MSE ratios (n = 200)", [&](Line& l) {
    if (!have_s3) throw NumericalError("scenario 3 run unavailable");
    const double r1 = s3.tmse_ratio(EstimatorKind::mle, EstimatorKind::mlse, true);
    const double r2 = s3.tmse_ratio(EstimatorKind::mlse, EstimatorKind::mlme, true);
    l.detail << " TMSE mle/mlse " << num(r1, 2) << ", mlse/mlme " << num(r2, 3);
    l.require(r1 >= 10.0, "mle/mlse >= 10");
    l.require(r2 >= 0.9 && r2 <= 1.1, "mlse/mlme in [0.9, 1.1]");
  });

  run("9", "Wald test levels (n = 200, 500 reps)", [&](Line& l) {
    const ScenarioSpec s = scenario(1, 200, 500, 909);
    const MonteCarloSummary m = run_monte_carlo(s);
    check_reliable(l, m);
    double lo = 1.0, hi = 0.0;
    for (auto k : {EstimatorKind::mle, EstimatorKind::mlse, EstimatorKind::mlme})
      for (double v : m.find(k, false).rejection) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    l.detail << " clean levels in [" << num(lo) << ", " << num(hi) << "]";
    l.require(lo >= 0.02 && hi <= 0.09, "clean levels within [0.02, 0.09]");
    const double g = m.find(EstimatorKind::mle, true).rejection[kG];
    l.detail << "; contaminated mle gamma " << num(g);
    l.require(g >= 0.90, "contaminated mle gamma rejection >= 0.90");
    for (auto k : {EstimatorKind::mlse, EstimatorKind::mlme}) {
      const double worst = m.find(k, true).rejection.maxCoeff();
      l.detail << ", " << estimator_name(k) << " max " << num(worst);
      l.require(worst <= 0.15, std::string(estimator_name(k)) + " contaminated levels <= 0.15");
    }
  });

  run("10", "sandwich se vs Monte Carlo sd (n = 400, 2000 reps)", [&](Line& l) {
    ScenarioSpec s = scenario(1, 400, 2000, 1010);
    s.contaminate_continuous = false;
    s.fit_contaminated = false;
    s.tune = false;
    s.fixed_alpha = {0.1, 0.1};
    s.estimators = {EstimatorKind::mlse, EstimatorKind::mlme};
    const MonteCarloSummary m = run_monte_carlo(s);
    check_reliable(l, m);
    for (auto k : s.estimators) {
      const Eigen::Index p = 6;
      Vector sum = Vector::Zero(p), sq = Vector::Zero(p), se = Vector::Zero(p);
      int used = 0;
      for (const auto& r : m.records)
        if (r.estimator == k && r.converged && r.se.allFinite()) {
          sum += r.estimate;
          sq += r.estimate.cwiseProduct(r.estimate);
          se += r.se;
          ++used;
        }
      const Vector mean = sum / used;
      const Vector sd = ((sq - used * mean.cwiseProduct(mean)) / (used - 1)).cwiseSqrt();
      const Vector ratio = sd.cwiseQuotient(se / used);
      l.detail << ' ' << estimator_name(k) << " sd/se in [" << num(ratio.minCoeff()) << ", " << num(ratio.maxCoeff())
               << "];";
      l.require(ratio.minCoeff() >= 0.85 && ratio.maxCoeff() <= 1.15, "sd/se within 15%");
    }
  });

  run("11", "quantile residual calibration (n = 2000)", [&](Line& l) {
    Rng rng = substream(1111, 0);
    const ObservationSet obs = generate_clean(2000, dgp, rng);
    FitOptions fo;
    fo.covariance = false;
    const FitResult f = fit(obs, fo);
    l.require(f.converged(), "fit converged");
    const double ks = ks_distance_normal(quantile_residuals(obs, links, f.estimate, 11));
    l.detail << " KS distance " << num(ks, 4);
    l.require(ks < 0.05, "KS < 0.05");
  });

  run("T7", "application report on bundled data", [&](Line& l) {
    const DataTable t = read_csv(std::filesystem::path(IBREG_SOURCE_DIR) / "data" / "synthetic_cfr.csv");
    ModelFormula f;
    f.response = "CFR";
    f.discrete = f.mean = f.precision = {"Pop", "HDI"};
    const ModelData md = build_model_data(t, f);
    std::vector<FitArtifact> arts(2);
    FitOptions fo;
    arts[0].fit = fit(md.obs, fo);
    const TunedFit tf = fit_tuned(md.obs, EstimatorKind::mlse, links);
    arts[1].fit = tf.fit;
    arts[1].tuned = true;
    arts[1].discrete_trace = tf.discrete;
    arts[1].continuous_trace = tf.continuous;
    for (auto& a : arts) {
      a.data_path = "synthetic_cfr.csv";
      a.formula = f;
      a.n = md.obs.n();
      a.n_dagger = md.obs.n_dagger();
      l.require(a.fit.converged(), "fits converged");
    }
    std::ostringstream os;
    write_report(os, parameter_names(f), {&arts[0], &arts[1]});
    const std::string rep = os.str();
    for (const char* s : {"discrete submodel", "mean submodel", "precision submodel", "Estimate", "SE", "z",
                          "p-value", "(Intercept)", "Pop", "HDI"})
      l.require(rep.find(s) != std::string::npos, std::string("report has '") + s + "'");
    int rows = 0;
    std::istringstream in(rep);
    for (std::string line; std::getline(in, line);)
      if (line.size() > 2 && line.rfind("  ", 0) == 0 && line[2] != ' ') ++rows;
    l.require(rows == 9, "nine coefficient rows");
    const WaldTest w = wald_test(-2.774, 1.0, 0.0);
    const WaldTest pair = wald_test(-0.267, 0.096, 0.0);
    l.detail << " report rows " << rows << ", alpha (" << num(tf.discrete.chosen_alpha, 2) << ", "
             << num(tf.continuous.chosen_alpha, 2) << "); z = -2.774 gives p " << num(w.p_value, 3)
             << "; -0.267 / 0.096 gives z " << num(pair.z, 3) << ", p " << num(pair.p_value, 3);
    l.require(std::abs(std::round(w.p_value * 1000) / 1000 - 0.006) < 1e-12, "p rounds to 0.006");
    l.require(std::abs(w.z + 2.774) < 1e-12, "z = -2.774");
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
