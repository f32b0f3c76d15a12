#pragma once

// Data generation, contamination and the Monte Carlo harness.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ibreg/tuning.hpp"

namespace ibreg {

using Rng = std::mt19937_64;

/// Generator for stream `index` of `seed`; the same pair always gives the same stream.
Rng substream(std::uint64_t seed, std::uint64_t index);

double draw_beta(double mu, double phi, Rng& rng);

/// True parameters and covariate laws: S = (1, N(0,1), N(0,1)...), X = (1, U(0,1)...),
/// Z = intercept only unless `precision_covariates` > 0 (N(0,1) columns).
struct Dgp {
  ParamVector truth;
  LinkSpec links;
  int c = 0;
};

/// kappa = (0, 2, 2), beta = (-1.8, -2), gamma = 4.5, zero inflation.
Dgp default_dgp();

/// Fresh covariates and responses.
ObservationSet generate_clean(int n, const Dgp& dgp, Rng& rng);

/// New responses from the model at `upsilon`, keeping the covariates of `obs`.
ObservationSet draw_responses(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon, int c,
                              Rng& rng);

/// Replaces the ceil(rate * n-dagger) continuous observations with the lowest
/// means by beta((1 + mu) / 2, phi) draws. `touched` receives the rows.
ObservationSet contaminate_continuous(const ObservationSet& obs, const Dgp& dgp, double rate, Rng& rng,
                                      std::vector<Eigen::Index>* touched = nullptr);

/// How the slope covariates of discrete outliers are moved, with
/// d = distance_factor * sqrt(p0):
///  translate: each slope covariate increases by d (towards higher theta);
///  project:   onto the hyperplane parallel to {s : kappa' (1, s) = 0} at
///             distance d on the high-probability side.
enum class LeverageShift { translate, project };

/// Replaces the ceil(rate * n) observations with the highest inflation
/// probabilities by beta(mu, phi) draws and shifts their slope covariates.
ObservationSet contaminate_discrete(const ObservationSet& obs, const Dgp& dgp, double rate, Rng& rng,
                                    std::vector<Eigen::Index>* touched = nullptr, double distance_factor = 1.5,
                                    LeverageShift shift = LeverageShift::translate);

struct ScenarioSpec {
  std::string name = "scenario";
  int n = 100;
  Dgp dgp = default_dgp();
  bool contaminate_continuous = true;
  bool contaminate_discrete = false;
  double rate = 0.05;
  double distance_factor = 1.5;
  LeverageShift leverage_shift = LeverageShift::translate;
  int reps = 100;
  std::uint64_t seed = 1;
  std::vector<EstimatorKind> estimators{EstimatorKind::mle, EstimatorKind::mlse, EstimatorKind::mlme};
  bool tune = true;             ///< select alpha per replication; otherwise use `fixed_alpha`
  TuningConstants fixed_alpha;
  TuningOptions tuning;
  bool fit_clean = true;
  bool fit_contaminated = true;
  bool compute_se = true;
  bool redraw_covariates = true;  ///< otherwise one design drawn from the seed is reused by every replication
  double level = 0.05;          ///< nominal level of the Wald tests at the true values
  int threads = 1;

  void validate() const;
};

/// Scenario 1, 2 or 3 of the contamination study.
ScenarioSpec scenario(int number, int n, int reps, std::uint64_t seed);

/// Reads a TOML scenario description; errors name the offending field.
ScenarioSpec load_scenario(const std::filesystem::path& path);

struct ReplicationRecord {
  int rep = 0;
  bool contaminated = false;
  EstimatorKind estimator = EstimatorKind::mle;
  bool converged = false;
  Vector estimate;
  Vector se;
  TuningConstants alpha;
  std::vector<bool> rejected;  ///< Wald test of each coordinate at its true value
};

struct EstimatorSummary {
  EstimatorKind estimator = EstimatorKind::mle;
  bool contaminated = false;
  int used = 0;
  int failed = 0;
  Vector bias, rmse;
  double tmse = 0.0;
  Vector rejection;  ///< empirical level per coordinate (NaN without ses)
  double alpha_disc_mean = 0.0, alpha_disc_sd = 0.0;
  double alpha_cont_mean = 0.0, alpha_cont_sd = 0.0;
  bool reliable = true;  ///< failures at most 1% of replications
};

struct MonteCarloSummary {
  ScenarioSpec spec;
  std::vector<std::string> parameter_names;
  std::vector<EstimatorSummary> estimators;
  std::vector<ReplicationRecord> records;

  const EstimatorSummary& find(EstimatorKind kind, bool contaminated) const;
  /// TMSE(a) / TMSE(b) under the given condition.
  double tmse_ratio(EstimatorKind a, EstimatorKind b, bool contaminated) const;
};

MonteCarloSummary run_monte_carlo(const ScenarioSpec& spec);

/// The uncontaminated sample of replication `rep`.
ObservationSet clean_sample(const ScenarioSpec& spec, int rep);

/// Writes bias_rmse.csv, tuning.csv, tmse_ratio.csv, levels.csv, replications.csv and summary.json.
void write_summary(const MonteCarloSummary& summary, const std::filesystem::path& out_dir);

}  // namespace ibreg
