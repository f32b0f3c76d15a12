#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "ibreg/fit.hpp"
#include "ibreg/optimizer.hpp"
#include "ibreg/simulation.hpp"

using namespace ibreg;

TEST_CASE("quadratic from several starts") {
  Vector a(3);
  a << 1.5, -2.0, 0.25;
  auto f = [&](const Vector& x, Vector* g) {
    if (g) *g = -2.0 * (x - a);
    return -(x - a).squaredNorm();
  };
  for (double s : {-10.0, 0.0, 7.0}) {
    const OptimizationResult r = maximize(f, Vector::Constant(3, s));
    CHECK(r.report.converged);
    CHECK((r.x - a).cwiseAbs().maxCoeff() < 1e-8);
    for (std::size_t k = 1; k < r.report.objective_path.size(); ++k)
      CHECK(r.report.objective_path[k] >= r.report.objective_path[k - 1]);
  }
}

TEST_CASE("Rosenbrock") {
  auto f = [](const Vector& x, Vector* g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    if (g) {
      g->resize(2);
      (*g)[0] = -2 * a - 400 * x[0] * b;
      (*g)[1] = 200 * b;
    }
    return a * a + 100 * b * b;
  };
  const OptimizationResult r = minimize(f, Vector::Constant(2, -1.2));
  CHECK(r.report.converged);
  CHECK(std::abs(r.x[0] - 1) < 1e-6);
  CHECK(std::abs(r.x[1] - 1) < 1e-6);
  CHECK(r.report.final_grad_norm <= 1e-8);
}

TEST_CASE("separable logistic data is reported as diverging") {
  // y = 1 exactly when x > 0
  const double xs[] = {-2.0, -1.0, 1.0, 2.0};
  const double ys[] = {0.0, 0.0, 1.0, 1.0};
  auto f = [&](const Vector& b, Vector* g) {
    double ll = 0;
    if (g) *g = Vector::Zero(1);
    for (int i = 0; i < 4; ++i) {
      const double eta = b[0] * xs[i];
      ll += ys[i] * eta - log1p_exp(eta);
      if (g) (*g)[0] += (ys[i] - expit(eta)) * xs[i];
    }
    return ll;
  };
  const OptimizationResult r = maximize(f, Vector::Zero(1));
  CHECK_FALSE(r.report.converged);
  CHECK(r.report.diverging);
}

TEST_CASE("non-finite start is an input error") {
  auto f = [](const Vector&, Vector* g) {
    if (g) *g = Vector::Zero(1);
    return std::nan("");
  };
  CHECK_THROWS_AS(minimize(f, Vector::Zero(1)), InputError);
  CHECK_THROWS_AS(minimize(f, Vector::Constant(1, INFINITY)), InputError);
}

TEST_CASE("default starts") {
  Matrix one = Matrix::Ones(8, 1);
  Vector y(8);
  y << 0, 0, 0, 0, 0.2, 0.3, 0.7, 0.5;
  const ObservationSet obs(0, y, one, one, one);
  const ParamVector s = default_start(obs, LinkSpec{});
  CHECK(s.kappa[0] == doctest::Approx(0.0).epsilon(1e-14));
  double m = 0;
  for (int i = 4; i < 8; ++i) m += logit(y[i]);
  CHECK(s.beta[0] == doctest::Approx(m / 4).epsilon(1e-12));
  CHECK(std::isfinite(s.gamma[0]));

  Matrix S(8, 2);
  S.col(0).setOnes();
  S.col(1).setOnes();
  CHECK_THROWS_WITH_AS(default_start(ObservationSet(0, y, S, one, one), LinkSpec{}),
                       doctest::Contains("discrete submodel"), InputError);
}

TEST_CASE("maximum likelihood fit is stationary and deterministic") {
  const Dgp d = default_dgp();
  Rng rng = substream(3, 0);
  const ObservationSet obs = generate_clean(100, d, rng);
  FitOptions fo;
  const FitResult a = fit(obs, fo);
  const FitResult b = fit(obs, fo);
  REQUIRE(a.converged());
  const EstimatingFunctionValue u = mle_score(obs, fo.links, a.estimate);
  CHECK(u.u_kappa.cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(u.u_theta.cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(a.estimate.flat() == b.estimate.flat());
  CHECK(a.discrete.iterations == b.discrete.iterations);
  CHECK(a.continuous.iterations == b.continuous.iterations);
}

TEST_CASE("robust warm start does not decrease the robust objective") {
  const Dgp d = default_dgp();
  Rng rng = substream(4, 0);
  const ObservationSet obs = contaminate_continuous(generate_clean(150, d, rng), d, 0.05, rng);
  const PartFit ml = fit_continuous(obs, d.links, EstimatorKind::mle, 0.0, default_start(obs, d.links).theta());
  const PartFit rb = fit_continuous(obs, d.links, EstimatorKind::mlse, 0.1, ml.estimate);
  REQUIRE(rb.report.converged);
  CHECK(rb.report.objective_path.back() <= rb.report.objective_path.front());
}
