#pragma once

#include <random>

#include "ibreg/model.hpp"
#include "ibreg/special.hpp"

namespace fixtures {

// Small zero-inflated sample with one covariate in each submodel.
inline ibreg::ObservationSet small_sample(int n = 80, unsigned seed = 7, int c = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  ibreg::Matrix S(n, 2), X(n, 2), Z(n, 2);
  ibreg::Vector y(n);
  for (int i = 0; i < n; ++i) {
    S(i, 0) = X(i, 0) = Z(i, 0) = 1.0;
    S(i, 1) = nd(rng);
    X(i, 1) = ud(rng);
    Z(i, 1) = nd(rng) * 0.3;
    const double theta = ibreg::expit(-0.5 + 0.8 * S(i, 1));
    const double mu = ibreg::expit(-0.4 + 0.9 * X(i, 1));
    const double phi = std::exp(2.5 + 0.5 * Z(i, 1));
    if (ud(rng) < theta) {
      y[i] = c;
    } else {
      std::gamma_distribution<double> ga(mu * phi), gb((1 - mu) * phi);
      const double a = ga(rng), b = gb(rng);
      y[i] = std::clamp(a / (a + b), 1e-10, 1 - 1e-10);
    }
  }
  return ibreg::ObservationSet(c, y, S, X, Z);
}

template <class F>
ibreg::Vector central_difference(F f, const ibreg::Vector& x, double h = 1e-5) {
  ibreg::Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    ibreg::Vector a = x, b = x;
    a[j] += h;
    b[j] -= h;
    g[j] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

}  // namespace fixtures
