#include "crater/scores.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace crater {

void HistogramSpec::validate() const {
  if (axes.empty() || axes.size() > 2)
    throw std::invalid_argument("histogram spec: dims must be 1 or 2");
  for (const AxisSpec& a : axes) {
    if (a.bin_count < 2) throw std::invalid_argument("histogram spec: bin_count must be >= 2");
    if (!(a.range_lo < a.range_hi))
      throw std::invalid_argument("histogram spec: range_lo must be < range_hi");
  }
}

int default_bin_count(int dims) { return dims >= 2 ? 32 : 64; }

std::optional<Eigen::Index> bin_index(const HistogramSpec& spec,
                                      std::span<const double> scores) {
  Eigen::Index idx = 0;
  for (std::size_t a = 0; a < spec.axes.size(); ++a) {
    const AxisSpec& ax = spec.axes[a];
    const double s = scores[a];
    if (!(s >= ax.range_lo) || !(s <= ax.range_hi)) return std::nullopt;
    const double width = (ax.range_hi - ax.range_lo) / ax.bin_count;
    Eigen::Index b = static_cast<Eigen::Index>(std::floor((s - ax.range_lo) / width));
    if (b >= ax.bin_count) b = ax.bin_count - 1;  // closed last bin
    idx = idx * ax.bin_count + b;
  }
  return idx;
}

HistogramSpec make_spec_from_training(
    const std::vector<std::vector<MatchResult>>& per_axis_results,
    std::span<const int> bin_counts, double margin) {
  if (per_axis_results.empty() || per_axis_results.size() > 2)
    throw std::invalid_argument("make_spec_from_training: need 1 or 2 axes");
  if (bin_counts.size() != per_axis_results.size())
    throw std::invalid_argument("make_spec_from_training: one bin count per axis");
  HistogramSpec spec;
  for (std::size_t a = 0; a < per_axis_results.size(); ++a) {
    const auto& results = per_axis_results[a];
    if (results.size() < 2)
      throw std::invalid_argument("make_spec_from_training: need >= 2 scores per axis");
    double lo = results[0].best_score, hi = results[0].best_score;
    for (const MatchResult& r : results) {
      if (r.measure != results[0].measure || r.template_kind != results[0].template_kind)
        throw std::invalid_argument("make_spec_from_training: mixed score types on one axis");
      lo = std::min(lo, r.best_score);
      hi = std::max(hi, r.best_score);
    }
    if (!(hi > lo))
      throw std::invalid_argument("make_spec_from_training: degenerate scores on axis " +
                                  std::to_string(a));
    const double span = hi - lo;
    AxisSpec ax;
    ax.measure = results[0].measure;
    ax.template_kind = results[0].template_kind;
    ax.bin_count = bin_counts[a];
    ax.range_lo = lo - margin * span;
    ax.range_hi = hi + margin * span;
    spec.axes.push_back(ax);
  }
  spec.validate();
  return spec;
}

ScoreHistogram empty_histogram(const HistogramSpec& spec) {
  spec.validate();
  ScoreHistogram h;
  h.spec = spec;
  h.counts = Vector::Zero(spec.total_bins());
  return h;
}

ScoreHistogram accumulate(const HistogramSpec& spec,
                          const std::vector<std::vector<MatchResult>>& per_axis_results) {
  spec.validate();
  if (per_axis_results.size() != spec.axes.size())
    throw std::invalid_argument("accumulate: axis count mismatch");
  for (std::size_t a = 0; a < spec.axes.size(); ++a) {
    for (const MatchResult& r : per_axis_results[a]) {
      if (r.measure != spec.axes[a].measure || r.template_kind != spec.axes[a].template_kind)
        throw std::invalid_argument("accumulate: score type does not match axis spec");
    }
  }

  ScoreHistogram h = empty_histogram(spec);
  if (spec.axes.size() == 1) {
    for (const MatchResult& r : per_axis_results[0]) {
      const double s[1] = {r.best_score};
      if (auto idx = bin_index(spec, s)) {
        h.counts[*idx] += 1.0;
      } else {
        ++h.overflow_count;
      }
    }
  } else {
    std::map<std::int64_t, std::pair<double, double>> joined;
    std::map<std::int64_t, std::pair<bool, bool>> seen;
    for (const MatchResult& r : per_axis_results[0]) {
      joined[r.annotation_id].first = r.best_score;
      seen[r.annotation_id].first = true;
    }
    for (const MatchResult& r : per_axis_results[1]) {
      joined[r.annotation_id].second = r.best_score;
      seen[r.annotation_id].second = true;
    }
    for (const auto& [id, flags] : seen) {
      if (!flags.first || !flags.second)
        throw std::runtime_error("accumulate: annotation " + std::to_string(id) +
                                 " is missing a score on axis " + (flags.first ? "1" : "0"));
      const double s[2] = {joined[id].first, joined[id].second};
      if (auto idx = bin_index(spec, s)) {
        h.counts[*idx] += 1.0;
      } else {
        ++h.overflow_count;
      }
    }
  }
  h.total = h.counts.sum();
  return h;
}

ScoreHistogram merge(const ScoreHistogram& a, const ScoreHistogram& b) {
  if (!(a.spec == b.spec)) throw std::invalid_argument("merge: histogram specs differ");
  ScoreHistogram out = a;
  out.counts += b.counts;
  out.total += b.total;
  out.overflow_count += b.overflow_count;
  return out;
}

}  // namespace crater
