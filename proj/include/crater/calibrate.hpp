#pragma once

#include <span>
#include <utility>
#include <vector>

namespace crater {

/// Two-pass repeatability counts: craters marked by exactly one counter vs by
/// both counters.
struct RepeatabilityData {
  long n_single = 0;
  long n_double = 0;

  long total() const { return n_single + n_double; }
};

/// Multiplicative missing-data correction for one diameter band (or overall).
struct ScalingFactor {
  double band_lo = 0.0;  ///< band edges in px; lo = hi = 0 means "overall"
  double band_hi = 0.0;
  double s = 1.0;
  double var_s = 0.0;

  bool overall() const { return band_lo == 0.0 && band_hi == 0.0; }
};

/// A corrected count with its variance.
struct CountWithVariance {
  double count = 0.0;
  double variance = 0.0;
};

/// One bin of a size-frequency distribution.
struct SfdBin {
  double band_lo = 0.0;
  double band_hi = 0.0;
  double count = 0.0;
  double variance = 0.0;
};

/// Per-counter detection probability solving the observed single/double
/// mark-up frequencies: P = 2 n_double / (n_single + 2 n_double).
/// Throws std::domain_error when total() == 0.
double binomial_success_prob(const RepeatabilityData& rep);

/// Binomial variance u (P - P^2) of a reference count u made with detection
/// probability P.
double ground_truth_variance(double u, double p);

/// s = u / m0 with variance var_s = var_u / m0^2 + u^2 var_m0 / m0^4.
/// Throws std::domain_error when m0 <= 0 (uncalibratable band).
ScalingFactor scaling_factor(double u, double var_u, double m0, double var_m0);

/// c = m s with variance var_c = s^2 var_m + m^2 var_s.
CountWithVariance apply_correction(double m, double var_m, const ScalingFactor& sf);

/// chi2 per degree of freedom: (1/d) sum (c_i - u_i)^2 / (var_c_i + var_u_i).
double chi2_per_dof(std::span<const CountWithVariance> corrected,
                    std::span<const CountWithVariance> truth, int d);

/// Differential SFD: counts-with-variance per band, aligned with band_edges
/// (band i covers [edges[i], edges[i+1])). Returns one SfdBin per band.
std::vector<SfdBin> assemble_sfd(std::span<const CountWithVariance> per_band,
                                 std::span<const double> band_edges);

/// Cumulative variant: bin j sums all differential bins >= j. Variances are
/// summed; downstream consumers must treat neighbouring bins as correlated.
std::vector<SfdBin> cumulative_sfd(std::span<const SfdBin> differential);

/// Histogram of diameters over the band edges. Returns per-band counts plus
/// the number of diameters falling outside all bands.
std::pair<std::vector<long>, long> band_counts(std::span<const double> diameters,
                                               std::span<const double> band_edges);

}  // namespace crater
