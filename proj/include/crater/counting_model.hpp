#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace crater {

/// Parameters of the generative counting model: Poisson feature populations
/// with Beta-distributed per-region detection efficiencies.
struct CountingModelParams {
  double lambda_true = 0.0;   ///< expected genuine craters per region
  double lambda_false = 0.0;  ///< expected crater-like false features per region
  double alpha_t = 2.0;       ///< Beta shape for the true-crater efficiency
  double beta_t = 2.0;
  double alpha_f = 2.0;  ///< Beta shape for the false-feature counting rate
  double beta_f = 2.0;

  /// Throws std::invalid_argument unless rates are > 0-or-zero and shapes > 0.
  void validate() const;
};

/// One simulated counting region.
struct RegionDraw {
  long n_true = 0;     ///< N_T ~ Poisson(lambda_true)
  long n_false = 0;    ///< N_F ~ Poisson(lambda_false)
  double p_true = 0.0;   ///< P_T ~ Beta(alpha_t, beta_t)
  double p_false = 0.0;  ///< P_F ~ Beta(alpha_f, beta_f)
  long n_detected = 0;   ///< Binomial(n_true, p_true) + Binomial(n_false, p_false)
};

/// Beta density p^(a-1) (1-p)^(b-1) / B(a, b). Throws std::domain_error
/// outside 0 < p < 1 or for non-positive shapes.
double beta_pdf(double p, double alpha, double beta);

/// Simulates independent counting regions. Each region uses a sub-seed
/// derived as derive_seed(seed, region_index), so results are reproducible
/// and region loops may be parallelised without changing the draw.
std::vector<RegionDraw> simulate_regions(const CountingModelParams& params, long n_regions,
                                         std::uint64_t seed);

/// (sample std of n_detected) / sqrt(sample mean of n_detected).
/// Equals ~1 for a pure Poisson process, > 1 when efficiencies fluctuate.
/// Throws std::domain_error for < 2 draws or zero mean.
double excess_error_ratio(std::span<const RegionDraw> draws);

}  // namespace crater
