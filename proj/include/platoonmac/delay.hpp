#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "platoonmac/edca.hpp"

namespace platoonmac {

/// Exact discrete MAC-access-delay distribution: sparse atoms on the integer
/// microsecond grid, sorted by delay.
struct DelayDistribution {
  std::vector<std::pair<std::int64_t, double>> atoms;  ///< (delay_us, prob)
  double total_mass = 0.0;

  double mean_us() const;
  double variance_us2() const;
  /// P(delay <= x_us); 0 below the support.
  double cdf(double x_us) const;
};

/// Least-squares shifted-exponential fit of the distribution CDF.
struct CdfFit {
  double shift_us = 0.0;       ///< fixed at T_tr
  double rate_per_ms = 0.0;
  double rms_error = 0.0;
};

class DegenerateFitError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Builds the exact access-delay distribution of the given AC by atom algebra
/// over the backoff-cost and transmission components. The construction is
/// finite; total mass is 1 up to rounding.
DelayDistribution delay_pgf(const FixedPointSolution& sol, const EdcaParams& p,
                            int ac);

/// Fits 1 - e^{-rate (x - shift)} to the empirical CDF evaluated on the atom
/// support, with the shift pinned to ttr_us. Golden-section search on the
/// scalar rate. Throws DegenerateFitError when all mass sits on one atom.
CdfFit cdf_fit(const DelayDistribution& dist, std::int64_t ttr_us);

/// P(delay <= budget) from the exact distribution.
double reliability_exact(const DelayDistribution& dist, double budget_s);

/// P(delay <= budget) from a shifted-exponential fit.
double reliability_fitted(const CdfFit& fit, double budget_s);

/// Least-squares line rate = slope * y_star + intercept through per-headway
/// fitted rates. Throws std::invalid_argument for fewer than 3 points or a
/// rank-deficient (constant-headway) design.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit headway_rate_regression(const std::vector<double>& headways,
                                  const std::vector<double>& rates);

}  // namespace platoonmac
