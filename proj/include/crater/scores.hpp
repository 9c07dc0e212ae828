#pragma once

#include "crater/templates.hpp"
#include "crater/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace crater {

/// One histogram axis: which score feeds it and how it is binned.
struct AxisSpec {
  Measure measure = Measure::Mse;
  TemplateKind template_kind = TemplateKind::Appearance;
  int bin_count = 64;
  double range_lo = 0.0;
  double range_hi = 1.0;

  friend bool operator==(const AxisSpec&, const AxisSpec&) = default;
};

/// 1D or 2D binning specification, persisted with models so correction-time
/// binning is identical to training-time binning.
struct HistogramSpec {
  std::vector<AxisSpec> axes;

  int dims() const { return static_cast<int>(axes.size()); }
  Eigen::Index total_bins() const {
    Eigen::Index n = 1;
    for (const AxisSpec& a : axes) n *= a.bin_count;
    return n;
  }
  void validate() const;

  friend bool operator==(const HistogramSpec&, const HistogramSpec&) = default;
};

/// Binned score counts. 2D histograms are flattened row-major (axis 0 slow).
struct ScoreHistogram {
  HistogramSpec spec;
  Vector counts;               // integral values >= 0
  double total = 0.0;          // sum of counts
  long long overflow_count = 0;  // entries outside the binned range
};

/// Flat bin index for one score per axis, or nullopt when out of range.
/// Bins are half-open [lo, hi) with the last bin closed, so a score exactly
/// on an interior boundary lands in the upper bin.
std::optional<Eigen::Index> bin_index(const HistogramSpec& spec,
                                      std::span<const double> scores);

/// Builds a spec whose per-axis range covers the pooled training scores with
/// a proportional margin. Throws on degenerate (all-equal) scores.
HistogramSpec make_spec_from_training(
    const std::vector<std::vector<MatchResult>>& per_axis_results,
    std::span<const int> bin_counts, double margin);

/// Accumulates match results into a histogram. Results are joined across axes
/// by annotation id; an annotation missing a score on any axis is an error.
ScoreHistogram accumulate(const HistogramSpec& spec,
                          const std::vector<std::vector<MatchResult>>& per_axis_results);

/// Empty histogram with the given spec.
ScoreHistogram empty_histogram(const HistogramSpec& spec);

/// Adds counts of two histograms with identical specs.
ScoreHistogram merge(const ScoreHistogram& a, const ScoreHistogram& b);

/// Default bin counts: 64 per axis in 1D, 32 per axis in 2D.
int default_bin_count(int dims);

}  // namespace crater
