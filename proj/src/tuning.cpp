#include "ibreg/tuning.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "ibreg/inference.hpp"

namespace ibreg {

void TuningGrid::validate() const {
  if (!(start >= 0.0 && start < first_phase_end && first_phase_end <= alpha_max))
    throw InputError("tuning grid needs 0 <= start < first_phase_end <= alpha_max");
  if (!(spacing > 0.0) || !(L > 0.0) || m < 1) throw InputError("tuning grid needs spacing > 0, L > 0 and m >= 1");
}

int TuningGrid::index_of(double alpha) const { return static_cast<int>(std::lround((alpha - start) / spacing)); }

std::pair<TuningGrid, TuningGrid> default_grids() {
  return {TuningGrid{0.0, 0.2, 0.02, 0.5, 0.02, 3}, TuningGrid{0.0, 0.5, 0.05, 1.0, 0.02, 3}};
}

double sqv(const Vector& z_k, const Vector& z_k1) {
  if (z_k.size() != z_k1.size() || z_k.size() == 0)
    throw InputError("sqv needs two vectors of equal, non-zero length");
  return (z_k - z_k1).norm() / static_cast<double>(z_k.size());
}

Vector standardized_estimates(const Vector& estimates, const Vector& ses, double n) {
  if (estimates.size() != ses.size()) throw InputError("estimates and standard errors differ in length");
  if (!(ses.array() > 0.0).all()) throw DomainError("standard errors must be positive");
  return estimates.array() / (std::sqrt(n) * ses.array());
}

TuningTrace select_alpha(const GridFit& fit_at, const TuningGrid& grid, double n, RestartRule rule) {
  grid.validate();
  TuningTrace trace;
  struct Point {
    bool ok;
    Vector z;
  };
  std::map<int, Point> cache;

  auto point = [&](int idx) -> const Point& {
    auto it = cache.find(idx);
    if (it != cache.end()) return it->second;
    const double alpha = grid.at(idx);
    trace.evaluated_alphas.push_back(alpha);
    Point p{false, {}};
    try {
      const GridPoint g = fit_at(alpha);
      if (g.ok && g.estimates.allFinite() && g.ses.allFinite() && (g.ses.array() > 0.0).all()) {
        p.z = standardized_estimates(g.estimates, g.ses, n);
        p.ok = true;
      }
    } catch (const NumericalError&) {
    } catch (const DomainError&) {
    } catch (const InputError&) {
    }
    if (!p.ok) trace.failed_alphas.push_back(alpha);
    return cache.emplace(idx, std::move(p)).first->second;
  };

  // Indices k in [from, to) whose pair (k, k+1) is unstable.
  auto failing_pairs = [&](int from, int to) {
    std::vector<int> out;
    for (int k = from; k < to; ++k) {
      const Point& a = point(k);
      const Point& b = point(k + 1);
      SqvRecord r{grid.at(k), grid.at(k + 1), std::numeric_limits<double>::quiet_NaN(), false};
      if (a.ok && b.ok) {
        r.value = sqv(a.z, b.z);
        r.stable = r.value < grid.L;
      }
      trace.sqv_values.push_back(r);
      if (!r.stable) out.push_back(k);
    }
    return out;
  };
  // A failing pair (k, k+1) restarts at the grid point after k+1.
  auto next_start = [&](const std::vector<int>& failing) {
    return (rule == RestartRule::smallest_failing ? failing.front() : failing.back()) + 2;
  };

  const int m1 = grid.index_of(grid.first_phase_end);
  const int last = grid.index_of(grid.alpha_max);

  std::vector<int> failing = failing_pairs(0, m1);
  if (failing.empty()) {
    trace.chosen_alpha = grid.at(0);
    return trace;
  }
  int start = next_start(failing);
  for (int attempt = 0; attempt < 2; ++attempt) {
    while (start + grid.m <= last) {
      failing = failing_pairs(start, start + grid.m);
      if (failing.empty()) {
        trace.chosen_alpha = grid.at(start);
        return trace;
      }
      start = next_start(failing);
    }
    start = 0;
  }
  trace.chosen_alpha = 0.0;
  trace.fallback_to_zero = true;
  return trace;
}

TuningTrace tune_discrete(const ObservationSet& obs, const LinkSpec& links, const TuningOptions& options,
                          const Vector* start) {
  Vector warm = start ? *start : default_start(obs, links).kappa;
  GridFit f = [&](double alpha) {
    const PartFit pf = fit_discrete(obs, links, alpha, warm, options.optimizer, options.clamp);
    GridPoint g;
    if (!pf.report.converged) return g;
    warm = pf.estimate;
    g.estimates = pf.estimate;
    g.ses = cov_discrete(obs, links, pf.estimate, alpha).diagonal().cwiseMax(0.0).cwiseSqrt();
    g.ok = true;
    return g;
  };
  return select_alpha(f, options.discrete_grid, static_cast<double>(obs.n()), options.rule);
}

TuningTrace tune_continuous(const ObservationSet& obs, const LinkSpec& links, EstimatorKind kind,
                            const TuningOptions& options, const Vector* start) {
  const ParamVector s0 = default_start(obs, links);
  Vector warm = start ? *start : s0.theta();
  const Eigen::Index p1 = obs.p1();

  auto ses_at = [&](const Vector& theta, double alpha) {
    ParamVector u = ParamVector::from_parts(s0.kappa, theta, p1);
    const Matrix V = kind == EstimatorKind::mlme
                         ? cov_mlme(obs, links, u, alpha, ContinuousWeighting::subsample)
                         : cov_mlse(obs, links, u, alpha, ContinuousWeighting::subsample);
    return Vector(V.diagonal().cwiseMax(0.0).cwiseSqrt());
  };

  Vector fixed_ses;
  if (options.continuous_se == ContinuousSe::fixed_beta_regression) {
    const PartFit ml = fit_continuous(obs, links, EstimatorKind::mle, 0.0, warm, options.optimizer, options.clamp);
    if (!ml.report.converged) {
      TuningTrace t;
      t.evaluated_alphas.push_back(0.0);
      t.failed_alphas.push_back(0.0);
      t.fallback_to_zero = true;
      return t;
    }
    warm = ml.estimate;
    fixed_ses = ses_at(ml.estimate, 0.0);
  }

  GridFit f = [&](double alpha) {
    const PartFit pf = fit_continuous(obs, links, kind, alpha, warm, options.optimizer, options.clamp);
    GridPoint g;
    if (!pf.report.converged) return g;
    warm = pf.estimate;
    g.estimates = pf.estimate;
    g.ses = options.continuous_se == ContinuousSe::fixed_beta_regression ? fixed_ses : ses_at(pf.estimate, alpha);
    g.ok = true;
    return g;
  };
  return select_alpha(f, options.continuous_grid, static_cast<double>(obs.n_dagger()), options.rule);
}

TunedFit fit_tuned(const ObservationSet& obs, EstimatorKind kind, const LinkSpec& links,
                   const TuningOptions& options) {
  TunedFit out;
  FitOptions fo;
  fo.estimator = kind;
  fo.links = links;
  fo.optimizer = options.optimizer;
  fo.clamp = options.clamp;
  if (kind != EstimatorKind::mle) {
    out.discrete = tune_discrete(obs, links, options);
    out.continuous = tune_continuous(obs, links, kind, options);
    fo.alpha = {out.discrete.chosen_alpha, out.continuous.chosen_alpha};
  }
  out.fit = fit(obs, fo);
  return out;
}

}  // namespace ibreg
