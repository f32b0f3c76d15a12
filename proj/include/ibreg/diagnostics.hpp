#pragma once

// Residuals, robustness weights and simulated envelopes.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ibreg/objectives.hpp"
#include "ibreg/optimizer.hpp"

namespace ibreg {

struct FitResult;

/// h*^alpha (LSMLE, at the working precision) or h^alpha (LMDPDE) over the
/// continuous subsample, divided by its maximum. All ones at alpha = 0 and
/// for maximum likelihood.
Vector robust_weights(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon,
                      EstimatorKind kind, double alpha_cont);

/// Mixture CDF of the inflated beta law at y in (0,1).
double inflated_cdf(double y, int c, double theta, double mu, double phi);

/// Randomized quantile residuals, one per observation. Point masses draw a
/// uniform over their CDF jump from a generator seeded with `seed`.
Vector quantile_residuals(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon,
                          std::uint64_t seed);

struct ByPartResiduals {
  Vector discrete;    ///< signed Bernoulli deviance residuals, length n
  Vector continuous;  ///< standardized weighted residual 2, length n-dagger; NaN when h_ii >= 1
  Vector leverage;    ///< h_ii of the mean submodel, length n-dagger
  int missing = 0;
};

ByPartResiduals by_part_residuals(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon);

struct EnvelopeOptions {
  int n_sim = 100;
  double band = 0.95;
  std::uint64_t seed = 1;
  bool refit = false;  ///< refit each simulated dataset (slow)
};

struct EnvelopeTable {
  Vector normal_quantiles;
  Vector observed;  ///< sorted residuals
  Vector lower, median, upper;
  double fraction_inside = 0.0;
};

EnvelopeTable envelope(const ObservationSet& obs, const FitResult& fit, const EnvelopeOptions& options = {});

void write_envelope_csv(std::ostream& os, const EnvelopeTable& table);
/// QQ plot of the observed residuals with the envelope band.
void write_envelope_svg(std::ostream& os, const EnvelopeTable& table);
/// Index plot of values (e.g. weights or residuals) against the 1-based row.
void write_index_svg(std::ostream& os, const std::vector<Eigen::Index>& rows, const Vector& values,
                     const char* y_label);

/// One-sample Kolmogorov-Smirnov distance to the standard normal.
double ks_distance_normal(Vector values);

}  // namespace ibreg
