#include "crater/counting_model.hpp"

#include "crater/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace crater {

void CountingModelParams::validate() const {
  if (!(lambda_true >= 0.0) || !(lambda_false >= 0.0))
    throw std::invalid_argument("counting model: rates must be non-negative");
  if (!(alpha_t > 0.0) || !(beta_t > 0.0) || !(alpha_f > 0.0) || !(beta_f > 0.0))
    throw std::invalid_argument("counting model: Beta shapes must be positive");
}

double beta_pdf(double p, double alpha, double beta) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("beta_pdf: p must be in (0,1)");
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::domain_error("beta_pdf: shapes must be positive");
  const double log_beta_fn =
      std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta);
  return std::exp((alpha - 1.0) * std::log(p) + (beta - 1.0) * std::log1p(-p) - log_beta_fn);
}

std::vector<RegionDraw> simulate_regions(const CountingModelParams& params, long n_regions,
                                         std::uint64_t seed) {
  params.validate();
  if (n_regions < 1) throw std::invalid_argument("simulate_regions: n_regions must be >= 1");
  std::vector<RegionDraw> draws(static_cast<std::size_t>(n_regions));
  for (long i = 0; i < n_regions; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    RegionDraw& d = draws[static_cast<std::size_t>(i)];
    d.n_true = rng.poisson(params.lambda_true);
    d.n_false = rng.poisson(params.lambda_false);
    d.p_true = rng.beta(params.alpha_t, params.beta_t);
    d.p_false = rng.beta(params.alpha_f, params.beta_f);
    d.n_detected = rng.binomial(d.n_true, d.p_true) + rng.binomial(d.n_false, d.p_false);
  }
  return draws;
}

double excess_error_ratio(std::span<const RegionDraw> draws) {
  if (draws.size() < 2) throw std::domain_error("excess_error_ratio: need at least 2 draws");
  double mean = 0.0;
  for (const RegionDraw& d : draws) mean += static_cast<double>(d.n_detected);
  mean /= static_cast<double>(draws.size());
  if (mean <= 0.0) throw std::domain_error("excess_error_ratio: mean count is zero");
  double ss = 0.0;
  for (const RegionDraw& d : draws) {
    const double r = static_cast<double>(d.n_detected) - mean;
    ss += r * r;
  }
  const double var = ss / static_cast<double>(draws.size() - 1);
  return std::sqrt(var) / std::sqrt(mean);
}

}  // namespace crater
