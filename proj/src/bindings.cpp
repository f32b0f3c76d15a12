#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ibreg/diagnostics.hpp"
#include "ibreg/inference.hpp"
#include "ibreg/simulation.hpp"

namespace py = pybind11;
using namespace ibreg;

namespace {

LinkSpec links_from(const std::string& theta, const std::string& mu, const std::string& phi) {
  return {Link::from_name(theta), Link::from_name(mu), Link::from_name(phi)};
}

py::dict report_dict(const ConvergenceReport& r) {
  py::dict d;
  d["converged"] = r.converged;
  d["iterations"] = r.iterations;
  d["final_grad_norm"] = r.final_grad_norm;
  d["message"] = r.message;
  return d;
}

py::dict fit_dict(const FitResult& f) {
  py::dict d;
  d["estimator"] = std::string(estimator_name(f.estimator));
  d["alpha_disc"] = f.alpha.alpha_disc;
  d["alpha_cont"] = f.alpha.alpha_cont;
  d["kappa"] = f.estimate.kappa;
  d["beta"] = f.estimate.beta;
  d["gamma"] = f.estimate.gamma;
  d["se"] = f.se;
  d["covariance"] = f.covariance;
  d["weights"] = f.weights;
  d["converged"] = f.converged();
  d["discrete"] = report_dict(f.discrete);
  d["continuous"] = report_dict(f.continuous);
  return d;
}

ParamVector params(const Vector& kappa, const Vector& beta, const Vector& gamma) {
  ParamVector u;
  u.kappa = kappa;
  u.beta = beta;
  u.gamma = gamma;
  return u;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust and maximum likelihood estimation for zero-or-one inflated beta regression";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "fit",
      [](const Vector& y, const Matrix& S, const Matrix& X, const Matrix& Z, int c, const std::string& estimator,
         py::object alpha_disc, py::object alpha_cont, const std::string& link_theta, const std::string& link_mu,
         const std::string& link_phi, bool clamp) {
        const ObservationSet obs(c, y, S, X, Z);
        const LinkSpec links = links_from(link_theta, link_mu, link_phi);
        const EstimatorKind kind = estimator_from_name(estimator);
        py::dict out;
        if (kind != EstimatorKind::mle && alpha_disc.is_none() && alpha_cont.is_none()) {
          TuningOptions to;
          to.clamp = clamp;
          TunedFit tf;
          {
            py::gil_scoped_release release;
            tf = fit_tuned(obs, kind, links, to);
          }
          out = fit_dict(tf.fit);
          out["tuned"] = true;
          out["fallback_to_zero"] = py::make_tuple(tf.discrete.fallback_to_zero, tf.continuous.fallback_to_zero);
          return out;
        }
        FitOptions fo;
        fo.estimator = kind;
        fo.links = links;
        fo.clamp = clamp;
        if (kind != EstimatorKind::mle)
          fo.alpha = {alpha_disc.is_none() ? 0.0 : alpha_disc.cast<double>(),
                      alpha_cont.is_none() ? 0.0 : alpha_cont.cast<double>()};
        FitResult f;
        {
          py::gil_scoped_release release;
          f = fit(obs, fo);
        }
        out = fit_dict(f);
        out["tuned"] = false;
        return out;
      },
      py::arg("y"), py::arg("S"), py::arg("X"), py::arg("Z"), py::arg("c") = 0, py::arg("estimator") = "mle",
      py::arg("alpha_disc") = py::none(), py::arg("alpha_cont") = py::none(), py::arg("link_theta") = "logit",
      py::arg("link_mu") = "logit", py::arg("link_phi") = "log", py::arg("clamp") = false,
      "Fit by mle, mlse or mlme. Robust fits without alphas select them by SQV.");

  m.def(
      "generate",
      [](int n, std::uint64_t seed, int scenario) {
        if (scenario < 0 || scenario > 3) throw InputError("scenario must be 0, 1, 2 or 3");
        const Dgp d = default_dgp();
        Rng rng = substream(seed, 0);
        ObservationSet obs = generate_clean(n, d, rng);
        if (scenario == 1 || scenario == 3) obs = contaminate_continuous(obs, d, 0.05, rng);
        if (scenario == 2 || scenario == 3) obs = contaminate_discrete(obs, d, 0.05, rng);
        py::dict out;
        out["y"] = obs.y();
        out["S"] = obs.S();
        out["X"] = obs.X();
        out["Z"] = obs.Z();
        return out;
      },
      py::arg("n"), py::arg("seed") = 1, py::arg("scenario") = 0,
      "Dataset from the simulation design: kappa = (0, 2, 2), beta = (-1.8, -2), gamma = 4.5.");

  m.def(
      "quantile_residuals",
      [](const Vector& y, const Matrix& S, const Matrix& X, const Matrix& Z, const Vector& kappa, const Vector& beta,
         const Vector& gamma, int c, std::uint64_t seed) {
        return quantile_residuals(ObservationSet(c, y, S, X, Z), LinkSpec{}, params(kappa, beta, gamma), seed);
      },
      py::arg("y"), py::arg("S"), py::arg("X"), py::arg("Z"), py::arg("kappa"), py::arg("beta"), py::arg("gamma"),
      py::arg("c") = 0, py::arg("seed") = 1);

  m.def(
      "wald_test",
      [](double estimate, double se, double null_value) {
        const WaldTest w = wald_test(estimate, se, null_value);
        return py::make_tuple(w.z, w.p_value);
      },
      py::arg("estimate"), py::arg("se"), py::arg("null_value") = 0.0, "Returns (z, two-sided p-value).");

  m.def("power_integral", &power_integral, py::arg("mu"), py::arg("phi"), py::arg("power"),
        "Integral of the beta(mu, phi) density raised to `power`.");
  m.def("sqv", &sqv, py::arg("z_k"), py::arg("z_k1"));
  m.def("ks_distance_normal", &ks_distance_normal, py::arg("values"));
}
