#include "crater/calibrate.hpp"

#include <cmath>
#include <stdexcept>

namespace crater {

double binomial_success_prob(const RepeatabilityData& rep) {
  if (rep.n_single < 0 || rep.n_double < 0)
    throw std::invalid_argument("binomial_success_prob: negative counts");
  if (rep.total() == 0) throw std::domain_error("binomial_success_prob: no craters");
  return 2.0 * static_cast<double>(rep.n_double) /
         (static_cast<double>(rep.n_single) + 2.0 * static_cast<double>(rep.n_double));
}

double ground_truth_variance(double u, double p) {
  if (!(u >= 0.0)) throw std::invalid_argument("ground_truth_variance: u must be >= 0");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("ground_truth_variance: P must be in [0,1]");
  return u * (p - p * p);
}

ScalingFactor scaling_factor(double u, double var_u, double m0, double var_m0) {
  if (!(m0 > 0.0)) throw std::domain_error("scaling_factor: uncalibratable (m0 <= 0)");
  ScalingFactor sf;
  sf.s = u / m0;
  sf.var_s = var_u / (m0 * m0) + (u * u) / (m0 * m0 * m0 * m0) * var_m0;
  return sf;
}

CountWithVariance apply_correction(double m, double var_m, const ScalingFactor& sf) {
  if (!(m >= 0.0)) throw std::invalid_argument("apply_correction: m must be >= 0");
  CountWithVariance out;
  out.count = m * sf.s;
  out.variance = sf.s * sf.s * var_m + m * m * sf.var_s;
  return out;
}

double chi2_per_dof(std::span<const CountWithVariance> corrected,
                    std::span<const CountWithVariance> truth, int d) {
  if (corrected.empty() || corrected.size() != truth.size())
    throw std::invalid_argument("chi2_per_dof: lists must be aligned and non-empty");
  if (d < 1) throw std::invalid_argument("chi2_per_dof: d must be >= 1");
  double chi2 = 0.0;
  for (std::size_t i = 0; i < corrected.size(); ++i) {
    const double var = corrected[i].variance + truth[i].variance;
    if (!(var > 0.0)) throw std::domain_error("chi2_per_dof: zero combined variance in a term");
    const double r = corrected[i].count - truth[i].count;
    chi2 += r * r / var;
  }
  return chi2 / static_cast<double>(d);
}

std::vector<SfdBin> assemble_sfd(std::span<const CountWithVariance> per_band,
                                 std::span<const double> band_edges) {
  if (band_edges.size() < 2) throw std::invalid_argument("assemble_sfd: need >= 2 band edges");
  for (std::size_t i = 1; i < band_edges.size(); ++i)
    if (!(band_edges[i] > band_edges[i - 1]))
      throw std::invalid_argument("assemble_sfd: band edges must be strictly increasing");
  if (per_band.size() != band_edges.size() - 1)
    throw std::invalid_argument("assemble_sfd: one count per band expected");
  std::vector<SfdBin> bins(per_band.size());
  for (std::size_t i = 0; i < per_band.size(); ++i) {
    bins[i].band_lo = band_edges[i];
    bins[i].band_hi = band_edges[i + 1];
    bins[i].count = per_band[i].count;
    bins[i].variance = per_band[i].variance;
    if (!(bins[i].variance >= 0.0))
      throw std::invalid_argument("assemble_sfd: negative variance");
  }
  return bins;
}

std::vector<SfdBin> cumulative_sfd(std::span<const SfdBin> differential) {
  std::vector<SfdBin> out(differential.begin(), differential.end());
  for (std::size_t i = out.size(); i-- > 0;) {
    if (i + 1 < out.size()) {
      out[i].count += out[i + 1].count;
      out[i].variance += out[i + 1].variance;
    }
  }
  return out;
}

std::pair<std::vector<long>, long> band_counts(std::span<const double> diameters,
                                               std::span<const double> band_edges) {
  if (band_edges.size() < 2) throw std::invalid_argument("band_counts: need >= 2 band edges");
  std::vector<long> counts(band_edges.size() - 1, 0);
  long outside = 0;
  for (double d : diameters) {
    bool placed = false;
    for (std::size_t i = 0; i + 1 < band_edges.size(); ++i) {
      const bool last = i + 2 == band_edges.size();
      if (d >= band_edges[i] && (d < band_edges[i + 1] || (last && d == band_edges[i + 1]))) {
        ++counts[i];
        placed = true;
        break;
      }
    }
    if (!placed) ++outside;
  }
  return {counts, outside};
}

}  // namespace crater
