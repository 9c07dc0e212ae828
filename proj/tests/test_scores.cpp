#include "crater/scores.hpp"

#include "crater/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <vector>

using namespace crater;

namespace {

MatchResult mk(std::int64_t id, double score, Measure m = Measure::Mse,
               TemplateKind k = TemplateKind::Appearance) {
  MatchResult r;
  r.annotation_id = id;
  r.best_score = score;
  r.measure = m;
  r.template_kind = k;
  r.best_sigma = 0.1;
  return r;
}

}  // namespace

TEST_CASE("make_spec_from_training ranges and margins") {
  std::vector<std::vector<MatchResult>> per_axis{{mk(1, 0.0), mk(2, 1.0)}};
  const int bins[1] = {64};
  HistogramSpec s0 = make_spec_from_training(per_axis, bins, 0.0);
  CHECK(s0.axes[0].range_lo == doctest::Approx(0.0));
  CHECK(s0.axes[0].range_hi == doctest::Approx(1.0));
  HistogramSpec s1 = make_spec_from_training(per_axis, bins, 0.1);
  CHECK(s1.axes[0].range_lo == doctest::Approx(-0.1));
  CHECK(s1.axes[0].range_hi == doctest::Approx(1.1));
  CHECK(s1.axes[0].bin_count == 64);

  std::vector<std::vector<MatchResult>> degenerate{{mk(1, 0.5), mk(2, 0.5)}};
  CHECK_THROWS_AS(make_spec_from_training(degenerate, bins, 0.05), std::invalid_argument);
}

TEST_CASE("default bin counts") {
  CHECK(default_bin_count(1) == 64);
  CHECK(default_bin_count(2) == 32);
}

TEST_CASE("accumulate: empty input, repeated score, boundary convention") {
  HistogramSpec spec;
  spec.axes.push_back({Measure::Mse, TemplateKind::Appearance, 4, 0.0, 4.0});

  const ScoreHistogram empty = accumulate(spec, {{}});
  CHECK(empty.total == 0.0);
  CHECK(empty.counts.sum() == 0.0);

  std::vector<MatchResult> results;
  for (int i = 0; i < 5; ++i) results.push_back(mk(i, 2.5));
  const ScoreHistogram h = accumulate(spec, {results});
  CHECK(h.total == 5.0);
  CHECK(h.counts[2] == 5.0);

  // score exactly on an interior boundary lands in the upper bin
  const ScoreHistogram hb = accumulate(spec, {{mk(1, 1.0)}});
  CHECK(hb.counts[1] == 1.0);
  // the last bin is closed: score == range_hi is kept
  const ScoreHistogram hc = accumulate(spec, {{mk(1, 4.0)}});
  CHECK(hc.counts[3] == 1.0);
  // outside goes to overflow
  const ScoreHistogram hd = accumulate(spec, {{mk(1, 4.0001)}});
  CHECK(hd.overflow_count == 1);
  CHECK(hd.total == 0.0);
}

TEST_CASE("accumulate 2D joins by annotation id and reports missing axes") {
  HistogramSpec spec;
  spec.axes.push_back({Measure::Mse, TemplateKind::Appearance, 4, 0.0, 4.0});
  spec.axes.push_back({Measure::Dp, TemplateKind::Derivative, 4, 0.0, 1.0});

  std::vector<MatchResult> a{mk(1, 0.5), mk(2, 2.5)};
  std::vector<MatchResult> b{mk(1, 0.9, Measure::Dp, TemplateKind::Derivative),
                             mk(2, 0.1, Measure::Dp, TemplateKind::Derivative)};
  const ScoreHistogram h = accumulate(spec, {a, b});
  CHECK(h.total == 2.0);
  CHECK(h.counts[0 * 4 + 3] == 1.0);  // (0.5, 0.9)
  CHECK(h.counts[2 * 4 + 0] == 1.0);  // (2.5, 0.1)

  std::vector<MatchResult> missing{mk(1, 0.9, Measure::Dp, TemplateKind::Derivative)};
  CHECK_THROWS_WITH_AS(accumulate(spec, {a, missing}), doctest::Contains("2"),
                       std::runtime_error);
}

TEST_CASE("accumulate validates score types against the axis spec") {
  HistogramSpec spec;
  spec.axes.push_back({Measure::Dp, TemplateKind::Appearance, 4, 0.0, 1.0});
  std::vector<MatchResult> wrong{mk(1, 0.5, Measure::Mse)};
  CHECK_THROWS_AS(accumulate(spec, {wrong}), std::invalid_argument);
}

TEST_CASE("accumulation is permutation invariant and additive under merge") {
  HistogramSpec spec;
  spec.axes.push_back({Measure::Mse, TemplateKind::Appearance, 16, 0.0, 1.0});
  Rng rng(31);
  std::vector<MatchResult> results;
  for (int i = 0; i < 500; ++i) results.push_back(mk(i, rng.uniform(-0.1, 1.1)));

  std::vector<MatchResult> shuffled = results;
  for (std::size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[rng.uniform_int(i)]);

  const ScoreHistogram h1 = accumulate(spec, {results});
  const ScoreHistogram h2 = accumulate(spec, {shuffled});
  CHECK((h1.counts - h2.counts).cwiseAbs().maxCoeff() == 0.0);
  CHECK(h1.overflow_count == h2.overflow_count);

  // merge(first half, second half) == accumulate(all)
  std::vector<MatchResult> first(results.begin(), results.begin() + 250);
  std::vector<MatchResult> second(results.begin() + 250, results.end());
  const ScoreHistogram merged = merge(accumulate(spec, {first}), accumulate(spec, {second}));
  CHECK((merged.counts - h1.counts).cwiseAbs().maxCoeff() == 0.0);
  CHECK(merged.overflow_count == h1.overflow_count);
  CHECK(merged.total == h1.total);

  HistogramSpec other = spec;
  other.axes[0].bin_count = 8;
  CHECK_THROWS_AS(merge(h1, empty_histogram(other)), std::invalid_argument);
}

TEST_CASE("spec validation") {
  HistogramSpec spec;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.axes.push_back({Measure::Mse, TemplateKind::Appearance, 1, 0.0, 1.0});
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.axes[0].bin_count = 4;
  spec.axes[0].range_hi = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
