#include "ibreg/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ibreg/special.hpp"

namespace ibreg {

void OptimizerConfig::validate() const {
  if (!(grad_tol > 0.0) || !(step_tol > 0.0) || max_iters < 1 || !(armijo_c > 0.0 && armijo_c < 1.0) ||
      !(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw InputError("invalid optimizer configuration");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Evaluates f, mapping domain failures and non-finite results to +inf.
double safe_eval(const ObjectiveFunction& f, const Vector& x, Vector* g) {
  try {
    const double v = f(x, g);
    if (!std::isfinite(v) || (g && !g->allFinite())) return kInf;
    return v;
  } catch (const NumericalError&) {
    return kInf;
  } catch (const DomainError&) {
    return kInf;
  }
}

}  // namespace

OptimizationResult minimize(const ObjectiveFunction& f, const Vector& start, const OptimizerConfig& config) {
  config.validate();
  if (!start.allFinite()) throw InputError("optimizer start contains non-finite values");
  const Eigen::Index p = start.size();
  OptimizationResult out;
  ConvergenceReport& rep = out.report;

  Vector x = start;
  Vector g(p);
  double fx = safe_eval(f, x, &g);
  if (!std::isfinite(fx)) throw InputError("objective is not finite at the starting values");
  rep.objective_path.push_back(fx);

  Matrix H = Matrix::Identity(p, p);
  bool scaled = false;
  Vector gn(p);
  for (int iter = 0;; ++iter) {
    rep.iterations = iter;
    const double gnorm = max_abs(g);
    if (gnorm <= config.grad_tol) {
      // A vanishing gradient with a large pending Newton step means the
      // objective flattens out at infinity rather than at a minimum.
      const Vector pending = -H * g;
      if (max_abs(pending) > 1e-2 * (1.0 + max_abs(x))) {
        rep.diverging = true;
        rep.message = "gradient vanished while iterates diverge";
      } else {
        rep.converged = true;
      }
      break;
    }
    if (iter >= config.max_iters) {
      rep.message = "iteration limit reached";
      break;
    }
    if (max_abs(x) > 1e4) {
      rep.diverging = true;
      rep.message = "parameters diverging";
      break;
    }

    Vector d = -H * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      H.setIdentity();
      scaled = false;
      d = -g;
      slope = g.dot(d);
    }
    if (!scaled) {
      // first step of unit length at most
      const double len = d.norm();
      if (len > 1.0) {
        d /= len;
        slope /= len;
      }
    }

    double t = 1.0;
    double fn = kInf;
    Vector xn;
    bool accepted = false;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(fx));
    while (t * max_abs(d) >= config.step_tol * (1.0 + max_abs(x))) {
      xn = x + t * d;
      fn = safe_eval(f, xn, &gn);
      if (fn <= fx + config.armijo_c * t * slope) {
        accepted = true;
        break;
      }
      // Close to the optimum the decrease drowns in rounding; accept steps
      // that keep the value within noise and shrink the gradient.
      if (std::isfinite(fn) && fn <= fx + noise && max_abs(gn) < gnorm) {
        accepted = true;
        break;
      }
      t *= config.backtrack_factor;
    }
    if (!accepted) {
      if (scaled) {
        // retry once along the steepest descent direction
        H.setIdentity();
        scaled = false;
        continue;
      }
      // The predicted decrease is below what rounding lets the objective
      // resolve: the iterate is a minimum to working precision.
      const Vector pending = -H * g;
      if (-g.dot(pending) <= 100.0 * noise && max_abs(pending) <= 1e-2 * (1.0 + max_abs(x))) {
        rep.converged = true;
        rep.message = "stopped at the rounding level of the objective";
      } else {
        rep.message = "line search failed to make progress";
      }
      break;
    }

    const Vector s = xn - x;
    const Vector y = gn - g;
    const double sy = s.dot(y);
    x = xn;
    fx = fn;
    g = gn;
    rep.objective_path.push_back(fx);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H = Matrix::Identity(p, p) * (sy / y.dot(y));
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vector Hy = H * y;
      H += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
    }
  }
  rep.final_grad_norm = max_abs(g);
  out.x = x;
  out.value = fx;
  return out;
}

OptimizationResult maximize(const ObjectiveFunction& f, const Vector& start, const OptimizerConfig& config) {
  auto neg = [&f](const Vector& x, Vector* g) {
    const double v = f(x, g);
    if (g) *g = -*g;
    return -v;
  };
  OptimizationResult r = minimize(neg, start, config);
  r.value = -r.value;
  for (double& v : r.report.objective_path) v = -v;
  return r;
}

EstimatorKind estimator_from_name(std::string_view name) {
  if (name == "mle") return EstimatorKind::mle;
  if (name == "mlse") return EstimatorKind::mlse;
  if (name == "mlme") return EstimatorKind::mlme;
  throw InputError("unknown estimator '" + std::string(name) + "' (expected mle, mlse or mlme)");
}

std::string_view estimator_name(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::mle: return "mle";
    case EstimatorKind::mlse: return "mlse";
    case EstimatorKind::mlme: return "mlme";
  }
  return "mle";
}

Vector checked_least_squares(const Matrix& design, const Vector& response, std::string_view what) {
  if (design.rows() < design.cols())
    throw InputError(std::string(what) + " design has fewer rows than columns");
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols())
    throw InputError(std::string(what) + " design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                     " of " + std::to_string(design.cols()) + " columns)");
  return qr.solve(response);
}

ParamVector default_start(const ObservationSet& obs, const LinkSpec& links, EstimatorKind) {
  ParamVector u;
  Vector zc(obs.n());
  for (Eigen::Index i = 0; i < obs.n(); ++i) zc[i] = links.theta.evaluate((obs.indicator()[i] + 0.5) / 2.0);
  u.kappa = checked_least_squares(obs.S(), zc, "discrete submodel");

  const auto& wp = obs.continuous_indices();
  const Eigen::Index nd = obs.n_dagger();
  if (nd <= obs.p1())
    throw InputError("too few observations in (0,1) (" + std::to_string(nd) + ") for the mean submodel");
  Matrix Xd(nd, obs.p1());
  Matrix Zd(nd, obs.p2());
  Vector zd(nd);
  for (Eigen::Index k = 0; k < nd; ++k) {
    Xd.row(k) = obs.X().row(wp[k]);
    Zd.row(k) = obs.Z().row(wp[k]);
    zd[k] = links.mu.evaluate(obs.y()[wp[k]]);
  }
  u.beta = checked_least_squares(Xd, zd, "mean submodel");
  checked_least_squares(Zd, Vector::Ones(nd), "precision submodel");

  // Method of moments on the link scale: var(g(y)) ~ g'(mu)^2 mu (1 - mu) / (1 + phi).
  const Vector fitted = Xd * u.beta;
  const double dof = static_cast<double>(std::max<Eigen::Index>(nd - obs.p1(), 1));
  const double sigma2 = std::max((zd - fitted).squaredNorm() / dof, 1e-12);
  double phi_sum = 0.0;
  for (Eigen::Index k = 0; k < nd; ++k) {
    const double mu = std::clamp(links.mu.inverse(fitted[k]), 1e-6, 1.0 - 1e-6);
    const double gp = links.mu.derivative(mu);
    phi_sum += mu * (1.0 - mu) / (sigma2 * gp * gp) - 1.0;
  }
  const double phi = std::max(phi_sum / static_cast<double>(nd), 1.0);
  u.gamma = checked_least_squares(Zd, Vector::Constant(nd, links.phi.evaluate(phi)), "precision submodel");
  return u;
}

}  // namespace ibreg
