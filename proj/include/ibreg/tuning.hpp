#pragma once

// Data-driven choice of the tuning constants by the stability of
// standardized estimates along a grid of alpha values, run separately for
// the discrete and continuous parts.

#include <functional>
#include <utility>
#include <vector>

#include "ibreg/fit.hpp"

namespace ibreg {

struct TuningGrid {
  double start = 0.0;
  double first_phase_end = 0.2;  ///< alpha_{m1}
  double spacing = 0.02;
  double alpha_max = 0.5;
  double L = 0.02;
  int m = 3;

  void validate() const;
  /// Number of grid intervals up to `alpha`, rounded to the nearest integer.
  int index_of(double alpha) const;
  double at(int index) const { return start + spacing * index; }
};

/// (continuous, discrete) defaults.
std::pair<TuningGrid, TuningGrid> default_grids();

/// Which failing pair restarts the search: the printed rule uses the
/// smallest failing alpha_k; `largest_failing` is the alternative reading.
enum class RestartRule { smallest_failing, largest_failing };

struct SqvRecord {
  double alpha_k;
  double alpha_k1;
  double value;  ///< NaN when either fit failed
  bool stable;
};

struct TuningTrace {
  std::vector<double> evaluated_alphas;  ///< in order of first evaluation
  std::vector<SqvRecord> sqv_values;     ///< in order of checking
  double chosen_alpha = 0.0;
  bool fallback_to_zero = false;
  std::vector<double> failed_alphas;     ///< fits that did not converge
};

double sqv(const Vector& z_k, const Vector& z_k1);
Vector standardized_estimates(const Vector& estimates, const Vector& ses, double n);

struct GridPoint {
  bool ok = false;
  Vector estimates;
  Vector ses;
};

using GridFit = std::function<GridPoint(double alpha)>;

/// Runs the grid search. `n` is the sample size used in the standardization.
TuningTrace select_alpha(const GridFit& fit_at, const TuningGrid& grid, double n,
                         RestartRule rule = RestartRule::smallest_failing);

enum class ContinuousSe {
  fixed_beta_regression,  ///< ses of the alpha = 0 beta regression on (0,1), reused along the grid
  per_alpha,              ///< robust ses at each grid point, subsample weighting
};

struct TuningOptions {
  TuningGrid continuous_grid = default_grids().first;
  TuningGrid discrete_grid = default_grids().second;
  RestartRule rule = RestartRule::smallest_failing;
  ContinuousSe continuous_se = ContinuousSe::fixed_beta_regression;
  OptimizerConfig optimizer;
  bool clamp = false;
};

TuningTrace tune_discrete(const ObservationSet& obs, const LinkSpec& links, const TuningOptions& options,
                          const Vector* start = nullptr);
TuningTrace tune_continuous(const ObservationSet& obs, const LinkSpec& links, EstimatorKind kind,
                            const TuningOptions& options, const Vector* start = nullptr);

struct TunedFit {
  FitResult fit;
  TuningTrace discrete;
  TuningTrace continuous;
};

/// Selects both tuning constants and refits at the chosen values.
TunedFit fit_tuned(const ObservationSet& obs, EstimatorKind kind, const LinkSpec& links,
                   const TuningOptions& options = {});

}  // namespace ibreg
