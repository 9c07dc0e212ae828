#include "crater/templates.hpp"

#include "crater/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace crater;

namespace {

GrayRaster ramp_patch(int n, double slope_x, double slope_y, double offset = 0.0) {
  GrayRaster p(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) = offset + slope_x * j + slope_y * i;
  return p;
}

Annotation ann_at(double x, double y, double d) {
  Annotation a;
  a.id = 1;
  a.x = x;
  a.y = y;
  a.diameter_px = d;
  return a;
}

}  // namespace

TEST_CASE("default smoothing schedule is the 16-level table") {
  const auto& s = default_smoothing_schedule();
  REQUIRE(s.size() == 16);
  CHECK(s.front() == doctest::Approx(0.10));
  CHECK(s.back() == doctest::Approx(1.54));
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
}

TEST_CASE("extract_patch is a pure crop at unit scale and integer alignment") {
  Rng rng(3);
  GrayRaster img(32, 32);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) img(i, j) = rng.uniform(0.0, 255.0);
  ExtractOptions opts;
  opts.min_diameter = 1.0;
  // odd out_size keeps sample positions integral around an integer centre
  const GrayRaster patch = extract_patch(img, ann_at(16, 14, 5.0), 7, 5.0, opts);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) CHECK(patch(i, j) == doctest::Approx(img(14 - 3 + i, 16 - 3 + j)));
}

TEST_CASE("extract_patch downscales by the diameter ratio") {
  // linear image sampled at twice the spacing reproduces a 2x ramp
  const GrayRaster img = ramp_patch(64, 1.0, 0.0);
  ExtractOptions opts;
  opts.min_diameter = 1.0;
  const GrayRaster patch = extract_patch(img, ann_at(32, 32, 10.0), 9, 5.0, opts);
  for (int j = 1; j < 9; ++j)
    CHECK(patch(4, j) - patch(4, j - 1) == doctest::Approx(2.0));
}

TEST_CASE("extract_patch errors and padding") {
  const GrayRaster img = ramp_patch(32, 1.0, 1.0);
  ExtractOptions opts;
  opts.min_diameter = 1.0;
  CHECK_THROWS_AS(extract_patch(img, ann_at(2, 16, 5.0), 9, 5.0, opts), std::out_of_range);
  CHECK_THROWS_AS(extract_patch(img, ann_at(-4, 16, 5.0), 9, 5.0, opts), std::out_of_range);
  opts.pad = PadMode::Mean;
  CHECK_NOTHROW(extract_patch(img, ann_at(2, 16, 5.0), 9, 5.0, opts));
  opts.pad = PadMode::Error;
  opts.min_diameter = 20.0;
  CHECK_THROWS_AS(extract_patch(img, ann_at(16, 16, 5.0), 9, 5.0, opts), std::invalid_argument);
}

TEST_CASE("appearance template: single patch and symmetry") {
  const GrayRaster p = ramp_patch(8, 1.0, 0.0, 10.0);
  const Template t1 = build_appearance_template(std::vector<GrayRaster>{p});
  CHECK(t1.kind == TemplateKind::Appearance);
  CHECK(std::fabs(t1.values.mean()) < 1e-9);
  const GrayRaster expected = p - p.mean();
  CHECK((t1.values - expected).abs().maxCoeff() < 1e-12);

  // two mean-subtracted patches that cancel leave an all-zero template
  GrayRaster q = -(p - p.mean());
  const Template t2 = build_appearance_template(std::vector<GrayRaster>{p, q});
  CHECK(t2.values.abs().maxCoeff() < 1e-12);
}

TEST_CASE("appearance template: noisy copies converge to the sprite (LLN oracle)") {
  Rng rng(5);
  GrayRaster sprite(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      sprite(i, j) = 100.0 + 30.0 * std::sin(0.7 * i) * std::cos(0.5 * j);
  const double noise_sigma = 4.0;
  std::vector<GrayRaster> patches;
  for (int k = 0; k < 100; ++k) {
    GrayRaster p = sprite;
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) p(i, j) += noise_sigma * rng.gauss();
    patches.push_back(std::move(p));
  }
  const Template tpl = build_appearance_template(patches);
  const GrayRaster centred = sprite - sprite.mean();
  CHECK((tpl.values - centred).abs().maxCoeff() < noise_sigma / 10.0 * 3.0);
}

TEST_CASE("derivative template: constant and ramp patches") {
  const GrayRaster constant = GrayRaster::Constant(6, 6, 42.0);
  const Template t0 = build_derivative_template(std::vector<GrayRaster>{constant});
  CHECK(t0.width == 12);
  CHECK(t0.height == 6);
  CHECK(t0.values.abs().maxCoeff() < 1e-12);

  const GrayRaster ramp = ramp_patch(6, 1.5, 0.0);
  const Template t1 = build_derivative_template(std::vector<GrayRaster>{ramp});
  // horizontal panel = slope everywhere, vertical panel = 0
  CHECK((t1.values.leftCols(6) - 1.5).abs().maxCoeff() < 1e-12);
  CHECK(t1.values.rightCols(6).abs().maxCoeff() < 1e-12);
}

TEST_CASE("score_mse basics") {
  GrayRaster t = ramp_patch(5, 0.3, -0.2);
  CHECK(score_mse(t, t) == doctest::Approx(0.0));
  const GrayRaster zeros = GrayRaster::Zero(5, 5);
  const GrayRaster c = GrayRaster::Constant(5, 5, 3.0);
  CHECK(score_mse(zeros, c) == doctest::Approx(9.0));
  GrayRaster impulse = t;
  impulse(2, 2) += 1.0;
  CHECK(score_mse(t, impulse) == doctest::Approx(1.0 / 25.0));
  CHECK_THROWS_AS(score_mse(t, GrayRaster::Zero(4, 4)), std::invalid_argument);
}

TEST_CASE("score_dp basics") {
  GrayRaster t = ramp_patch(5, 0.3, -0.2);
  t -= t.mean();
  const double norm = std::sqrt(t.square().sum());
  CHECK(score_dp(t, t) == doctest::Approx(norm / 25.0));
  CHECK(score_dp(t, (-t).eval()) == doctest::Approx(-norm / 25.0));
  // orthogonal patch scores zero: antisymmetric vs symmetric pattern
  GrayRaster orth(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) orth(i, j) = (i == 2 ? 1.0 : 0.0);
  orth -= orth.mean();
  // construct orthogonality explicitly
  const double dot = (t * orth).sum();
  CHECK(score_dp(t, orth) == doctest::Approx(dot / (25.0 * norm)));
  const GrayRaster zeros = GrayRaster::Zero(5, 5);
  CHECK_THROWS_AS(score_dp(zeros, t), std::domain_error);
}

TEST_CASE("scores are invariant to constant patch offsets after preparation") {
  Rng rng(11);
  GrayRaster patch(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) patch(i, j) = rng.uniform(0.0, 50.0);
  const GrayRaster shifted = patch + 17.5;
  for (TemplateKind kind : {TemplateKind::Appearance, TemplateKind::Derivative}) {
    const GrayRaster a = prepare_patch(patch, 0.4, kind);
    const GrayRaster b = prepare_patch(shifted, 0.4, kind);
    CHECK((a - b).abs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("dp scales linearly with patch gain") {
  Rng rng(12);
  GrayRaster t(8, 8), p(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      t(i, j) = rng.gauss();
      p(i, j) = rng.gauss();
    }
  const double s1 = score_dp(t, p);
  const double s3 = score_dp(t, (3.0 * p).eval());
  CHECK(s3 == doctest::Approx(3.0 * s1));
}

namespace {

// A small synthetic bowl sprite for match tests.
GrayRaster bowl_scene(int size, double cx, double cy, double radius, double amp) {
  GrayRaster img = GrayRaster::Constant(size, size, 100.0);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      const double dx = j - cx, dy = i - cy;
      const double rho = std::sqrt(dx * dx + dy * dy);
      if (rho < radius) {
        img(i, j) += amp * (dx / radius) * (1.0 - rho / radius);
      }
    }
  return img;
}

}  // namespace

TEST_CASE("best_match: singleton schedule equals direct scoring") {
  const GrayRaster img = bowl_scene(64, 32, 32, 12, 40);
  Annotation ann = ann_at(32, 32, 24);
  std::vector<GrayRaster> patches;
  ExtractOptions opts;
  opts.min_diameter = 1.0;
  patches.push_back(extract_patch(img, ann, 15, 10.0, opts));
  Template tpl = build_appearance_template(patches);
  tpl.target_diameter = 10.0;

  const std::vector<double> schedule = {0.62};
  const MatchResult r = best_match(img, ann, tpl, Measure::Mse, schedule, opts);
  const GrayRaster prepared = prepare_patch(patches[0], 0.62, TemplateKind::Appearance);
  CHECK(r.best_sigma == doctest::Approx(0.62));
  CHECK(r.best_score == doctest::Approx(score_mse(tpl.values, prepared)));
}

TEST_CASE("best_match: construct-and-verify smoothing search oracle") {
  // Patch manufactured by blurring the template at sigma = 0.62: the best MSE
  // over the full schedule must pick the generating sigma.
  const GrayRaster img = bowl_scene(64, 32, 32, 12, 40);
  Annotation ann = ann_at(32, 32, 24);
  ExtractOptions opts;
  opts.min_diameter = 1.0;
  const GrayRaster patch = extract_patch(img, ann, 15, 10.0, opts);

  GrayRaster blurred = gaussian_smooth(patch, 0.62);
  std::vector<GrayRaster> tpl_patches{blurred};
  Template tpl = build_appearance_template(tpl_patches);
  tpl.target_diameter = 10.0;

  const MatchResult r =
      best_match(img, ann, tpl, Measure::Mse, default_smoothing_schedule(), opts);
  CHECK(r.best_sigma == doctest::Approx(0.62));
  CHECK(r.measure == Measure::Mse);

  // and the DP variant picks a best at least as good as any single sigma
  const MatchResult rdp =
      best_match(img, ann, tpl, Measure::Dp, default_smoothing_schedule(), opts);
  for (double sigma : default_smoothing_schedule()) {
    const GrayRaster prepared = prepare_patch(patch, sigma, TemplateKind::Appearance);
    CHECK(rdp.best_score >= score_dp(tpl.values, prepared) - 1e-12);
  }
}

TEST_CASE("best_match propagates schedule errors") {
  const GrayRaster img = bowl_scene(32, 16, 16, 8, 30);
  Annotation ann = ann_at(16, 16, 10);
  ExtractOptions opts;
  opts.min_diameter = 1.0;
  std::vector<GrayRaster> patches{extract_patch(img, ann, 9, 6.0, opts)};
  Template tpl = build_appearance_template(patches);
  tpl.target_diameter = 6.0;
  CHECK_THROWS_AS(best_match(img, ann, tpl, Measure::Mse, std::vector<double>{}, opts),
                  std::invalid_argument);
}
