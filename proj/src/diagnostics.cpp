#include "ibreg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

#include "ibreg/fit.hpp"
#include "ibreg/simulation.hpp"
#include "ibreg/special.hpp"

namespace ibreg {

Vector robust_weights(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon,
                      EstimatorKind kind, double alpha_cont) {
  check_dimensions(obs, upsilon);
  const auto& wp = obs.continuous_indices();
  Vector w = Vector::Ones(static_cast<Eigen::Index>(wp.size()));
  if (kind == EstimatorKind::mle || alpha_cont == 0.0 || wp.empty()) return w;
  if (!(alpha_cont > 0.0 && alpha_cont < 1.0)) throw DomainError("continuous tuning constant must lie in [0,1)");
  const Vector mu = mean_predictor(obs, links.mu, upsilon.beta);
  const Vector phi = precision_predictor(obs, links.phi, upsilon.gamma);
  const double scale = kind == EstimatorKind::mlse ? 1.0 / (1.0 - alpha_cont) : 1.0;
  Vector logw(w.size());
  for (std::size_t k = 0; k < wp.size(); ++k) {
    const Eigen::Index i = wp[k];
    logw[static_cast<Eigen::Index>(k)] = alpha_cont * logit_beta_log_density(obs.y_star()[i], mu[i], phi[i] * scale);
  }
  return (logw.array() - logw.maxCoeff()).exp();
}

double inflated_cdf(double y, int c, double theta, double mu, double phi) {
  const double f = beta_cdf(y, mu, phi);
  return c == 0 ? theta + (1.0 - theta) * f : (1.0 - theta) * f;
}

namespace {

// Normal quantile from both tails so that probabilities near one keep their digits.
double two_tailed_quantile(double lower, double upper) {
  constexpr double tiny = std::numeric_limits<double>::min();
  if (lower <= upper) return normal_quantile(std::clamp(lower, tiny, 0.5));
  return -normal_quantile(std::clamp(upper, tiny, 0.5));
}

double quantile_sorted(const std::vector<double>& v, double p) {
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

Vector quantile_residuals(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon,
                          std::uint64_t seed) {
  const Predictors p = linear_predictors(obs, links, upsilon);
  Rng rng = substream(seed, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector r(obs.n());
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    const double th = p.theta[i];
    double lower = 0.0, upper = 0.0;
    if (obs.at_point_mass(i)) {
      const double u = unif(rng);
      if (obs.c() == 0) {
        lower = th * u;
        upper = 1.0 - lower;
      } else {
        upper = th * u;
        lower = 1.0 - upper;
      }
    } else {
      const double f = beta_cdf(obs.y()[i], p.mu[i], p.phi[i]);
      const double s = beta_survival(obs.y()[i], p.mu[i], p.phi[i]);
      lower = obs.c() == 0 ? th + (1.0 - th) * f : (1.0 - th) * f;
      upper = obs.c() == 0 ? (1.0 - th) * s : th + (1.0 - th) * s;
    }
    r[i] = two_tailed_quantile(lower, upper);
    if (!std::isfinite(r[i])) throw NumericalError("quantile residual is not finite at row " + std::to_string(i + 1));
  }
  return r;
}

ByPartResiduals by_part_residuals(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon) {
  const Predictors p = linear_predictors(obs, links, upsilon);
  ByPartResiduals out;
  out.discrete.resize(obs.n());
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    const double yc = obs.indicator()[i];
    const double th = p.theta[i];
    const double ll = yc != 0.0 ? std::log(th) : std::log1p(-th);
    const double dev = std::sqrt(std::max(-2.0 * ll, 0.0));
    out.discrete[i] = yc - th >= 0.0 ? dev : -dev;
  }

  const auto& wp = obs.continuous_indices();
  const auto nd = static_cast<Eigen::Index>(wp.size());
  Matrix Xd(nd, obs.p1());
  Vector w(nd), v(nd), res(nd);
  for (Eigen::Index k = 0; k < nd; ++k) {
    const Eigen::Index i = wp[static_cast<std::size_t>(k)];
    const double mu = p.mu[i], phi = p.phi[i];
    v[k] = trigamma(mu * phi) + trigamma((1.0 - mu) * phi);
    const double gp = links.mu.derivative(mu);
    w[k] = phi * phi * v[k] / (gp * gp);
    res[k] = obs.y_star()[i] - conditional_moments(mu, phi).mu_star;
    Xd.row(k) = obs.X().row(i);
  }
  out.leverage = Vector::Zero(nd);
  out.continuous = Vector::Zero(nd);
  if (nd == 0) return out;
  const Matrix info = Xd.transpose() * w.asDiagonal() * Xd;
  const Eigen::LDLT<Matrix> ldlt(info);
  if (ldlt.info() != Eigen::Success) throw NumericalError("mean-submodel information matrix is singular");
  const Matrix solved = ldlt.solve(Xd.transpose());
  for (Eigen::Index k = 0; k < nd; ++k) {
    const double h = w[k] * Xd.row(k).dot(solved.col(k));
    out.leverage[k] = h;
    if (h >= 1.0) {
      out.continuous[k] = std::numeric_limits<double>::quiet_NaN();
      ++out.missing;
    } else {
      out.continuous[k] = res[k] / std::sqrt(v[k] * (1.0 - h));
    }
  }
  return out;
}

EnvelopeTable envelope(const ObservationSet& obs, const FitResult& fit, const EnvelopeOptions& options) {
  if (options.n_sim < 2) throw InputError("envelope needs at least two simulations");
  if (!(options.band > 0.0 && options.band < 1.0)) throw InputError("envelope band must lie in (0,1)");
  const Eigen::Index n = obs.n();
  EnvelopeTable t;
  t.observed = quantile_residuals(obs, fit.links, fit.estimate, options.seed);
  std::sort(t.observed.data(), t.observed.data() + n);
  t.normal_quantiles.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    t.normal_quantiles[i] = normal_quantile((static_cast<double>(i) + 1.0 - 0.375) / (static_cast<double>(n) + 0.25));

  std::vector<std::vector<double>> sims(static_cast<std::size_t>(n));
  FitOptions fo;
  fo.estimator = fit.estimator;
  fo.alpha = fit.alpha;
  fo.links = fit.links;
  fo.covariance = false;
  int done = 0;
  for (int s = 0; done < options.n_sim && s < 20 * options.n_sim; ++s) {
    Rng rng = substream(options.seed, static_cast<std::uint64_t>(s) + 1);
    Vector r;
    try {
      const ObservationSet sim = draw_responses(obs, fit.links, fit.estimate, obs.c(), rng);
      ParamVector at = fit.estimate;
      if (options.refit) {
        const FitResult rf = ibreg::fit(sim, fo, fit.estimate);
        if (!rf.converged()) continue;
        at = rf.estimate;
      }
      r = quantile_residuals(sim, fit.links, at, rng());
    } catch (const InputError&) {
      continue;  // degenerate draw, e.g. too few observations in (0,1)
    } catch (const NumericalError&) {
      continue;
    }
    std::sort(r.data(), r.data() + n);
    for (Eigen::Index i = 0; i < n; ++i) sims[static_cast<std::size_t>(i)].push_back(r[i]);
    ++done;
  }
  if (done < 2) throw NumericalError("envelope simulations failed");
  t.lower.resize(n);
  t.median.resize(n);
  t.upper.resize(n);
  const double lo = (1.0 - options.band) / 2.0;
  int inside = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& col = sims[static_cast<std::size_t>(i)];
    std::sort(col.begin(), col.end());
    t.lower[i] = quantile_sorted(col, lo);
    t.median[i] = quantile_sorted(col, 0.5);
    t.upper[i] = quantile_sorted(col, 1.0 - lo);
    if (t.observed[i] >= t.lower[i] && t.observed[i] <= t.upper[i]) ++inside;
  }
  t.fraction_inside = static_cast<double>(inside) / static_cast<double>(n);
  return t;
}

void write_envelope_csv(std::ostream& os, const EnvelopeTable& t) {
  os << "normal_quantile,residual,lower,median,upper\n" << std::setprecision(10);
  for (Eigen::Index i = 0; i < t.observed.size(); ++i)
    os << t.normal_quantiles[i] << ',' << t.observed[i] << ',' << t.lower[i] << ',' << t.median[i] << ','
       << t.upper[i] << '\n';
}

namespace {

// 480 x 480 canvas, 50 px margins.
struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return 50.0 + 380.0 * (x - x0) / (x1 - x0); }
  double py(double y) const { return 430.0 - 380.0 * (y - y0) / (y1 - y0); }
};

void svg_open(std::ostream& os, const Frame& f, const char* x_label, const char* y_label) {
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n";
  os << "<rect x=\"50\" y=\"50\" width=\"380\" height=\"380\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"240\" y=\"470\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text x=\"15\" y=\"240\" text-anchor=\"middle\" transform=\"rotate(-90 15 240)\">" << y_label << "</text>\n";
  os << "<text x=\"50\" y=\"445\">" << f.x0 << "</text><text x=\"430\" y=\"445\" text-anchor=\"end\">" << f.x1
     << "</text>\n";
  os << "<text x=\"45\" y=\"430\" text-anchor=\"end\">" << f.y0 << "</text><text x=\"45\" y=\"55\" "
     << "text-anchor=\"end\">" << f.y1 << "</text>\n";
}

void polyline(std::ostream& os, const Frame& f, const Vector& x, const Vector& y, const char* style) {
  os << "<polyline fill=\"none\" " << style << " points=\"";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << f.px(x[i]) << ',' << f.py(y[i]) << ' ';
  os << "\"/>\n";
}

}  // namespace

void write_envelope_svg(std::ostream& os, const EnvelopeTable& t) {
  const double ylo = std::min(t.observed.minCoeff(), t.lower.minCoeff());
  const double yhi = std::max(t.observed.maxCoeff(), t.upper.maxCoeff());
  const Frame f{t.normal_quantiles.minCoeff(), t.normal_quantiles.maxCoeff(), ylo, yhi};
  svg_open(os, f, "Normal quantiles", "Quantile residuals");
  polyline(os, f, t.normal_quantiles, t.lower, "stroke=\"grey\"");
  polyline(os, f, t.normal_quantiles, t.upper, "stroke=\"grey\"");
  polyline(os, f, t.normal_quantiles, t.median, "stroke=\"grey\" stroke-dasharray=\"4 3\"");
  for (Eigen::Index i = 0; i < t.observed.size(); ++i)
    os << "<circle cx=\"" << f.px(t.normal_quantiles[i]) << "\" cy=\"" << f.py(t.observed[i]) << "\" r=\"2\"/>\n";
  os << "</svg>\n";
}

void write_index_svg(std::ostream& os, const std::vector<Eigen::Index>& rows, const Vector& values,
                     const char* y_label) {
  if (rows.empty()) throw InputError("nothing to plot");
  double lo = values.minCoeff(), hi = values.maxCoeff();
  if (hi <= lo) hi = lo + 1.0;
  const Frame f{1.0, static_cast<double>(rows.back() + 1) + 1.0, lo, hi};
  svg_open(os, f, "Index", y_label);
  for (std::size_t k = 0; k < rows.size(); ++k)
    os << "<circle cx=\"" << f.px(static_cast<double>(rows[k] + 1)) << "\" cy=\""
       << f.py(values[static_cast<Eigen::Index>(k)]) << "\" r=\"2\"/>\n";
  os << "</svg>\n";
}

double ks_distance_normal(Vector values) {
  const Eigen::Index n = values.size();
  if (n == 0) throw InputError("empty sample");
  std::sort(values.data(), values.data() + n);
  double d = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double F = normal_cdf(values[i]);
    d = std::max({d, static_cast<double>(i + 1) / static_cast<double>(n) - F, F - static_cast<double>(i) / static_cast<double>(n)});
  }
  return d;
}

}  // namespace ibreg
