#pragma once

// Quasi-Newton minimization with backtracking line search, and the starting
// values shared by every estimator.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ibreg/model.hpp"

namespace ibreg {

struct OptimizerConfig {
  double grad_tol = 1e-8;  ///< on the max-abs gradient
  double step_tol = 1e-10;
  int max_iters = 500;
  double backtrack_factor = 0.5;
  double armijo_c = 1e-4;

  void validate() const;
};

struct ConvergenceReport {
  bool converged = false;
  int iterations = 0;
  double final_grad_norm = 0.0;
  std::vector<double> objective_path;
  /// Set when the iterates run off towards infinity (e.g. separable data).
  bool diverging = false;
  std::string message;
};

/// Objective value at x; writes the gradient when the pointer is non-null.
/// May throw NumericalError outside its domain, which the line search treats
/// as an infeasible trial point.
using ObjectiveFunction = std::function<double(const Vector& x, Vector* gradient)>;

struct OptimizationResult {
  Vector x;
  double value = 0.0;
  ConvergenceReport report;
};

OptimizationResult minimize(const ObjectiveFunction& f, const Vector& start, const OptimizerConfig& config = {});
OptimizationResult maximize(const ObjectiveFunction& f, const Vector& start, const OptimizerConfig& config = {});

enum class EstimatorKind { mle, mlse, mlme };

EstimatorKind estimator_from_name(std::string_view name);
std::string_view estimator_name(EstimatorKind kind) noexcept;

/// Moment-based starting values: kappa from least squares of
/// g_theta((y^c + 1/2) / 2) on S, beta from least squares of g_mu(y) on X over
/// the continuous subsample, gamma matching the method-of-moments precision.
ParamVector default_start(const ObservationSet& obs, const LinkSpec& links, EstimatorKind kind = EstimatorKind::mle);

/// Least-squares solve that rejects rank-deficient designs, naming `what`.
Vector checked_least_squares(const Matrix& design, const Vector& response, std::string_view what);

}  // namespace ibreg
