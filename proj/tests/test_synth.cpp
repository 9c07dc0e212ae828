#include "crater/synth.hpp"

#include "crater/templates.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace crater;

TEST_CASE("empty scene with no noise is constant background") {
  SceneSpec spec;
  spec.width = 32;
  spec.height = 24;
  spec.noise_sigma = 0.0;
  spec.background_level = 117.0;
  const RenderedScene scene = render_scene(spec, 1);
  CHECK(scene.raster.rows() == 24);
  CHECK(scene.raster.cols() == 32);
  CHECK((scene.raster - 117.0).abs().maxCoeff() == doctest::Approx(0.0));
  CHECK(scene.annotations.empty());
}

TEST_CASE("rendering is deterministic per seed") {
  SceneSpec spec;
  spec.width = 64;
  spec.height = 64;
  spec.noise_sigma = 5.0;
  SceneFeature f;
  f.x = 32;
  f.y = 30;
  f.diameter_px = 18;
  f.degradation = 0.4;
  f.cls = Label::True;
  spec.craters.push_back(f);
  const RenderedScene a = render_scene(spec, 77);
  const RenderedScene b = render_scene(spec, 77);
  const RenderedScene c = render_scene(spec, 78);
  CHECK((a.raster - b.raster).abs().maxCoeff() == 0.0);
  CHECK((a.raster - c.raster).abs().maxCoeff() > 0.0);
  REQUIRE(a.annotations.size() == 1);
  CHECK(a.annotations[0].label == Label::True);
  CHECK(a.annotations[0].diameter_px == doctest::Approx(18.0));
}

TEST_CASE("a noiseless crater's rim pixels differ from background") {
  SceneSpec spec;
  spec.width = 64;
  spec.height = 64;
  spec.noise_sigma = 0.0;
  spec.background_level = 100.0;
  SceneFeature f;
  f.x = 32;
  f.y = 32;
  f.diameter_px = 20;
  f.degradation = 0.0;
  f.cls = Label::True;
  spec.craters.push_back(f);
  const RenderedScene scene = render_scene(spec, 1);
  double max_dev = 0.0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      max_dev = std::max(max_dev, std::fabs(scene.raster(i, j) - 100.0));
  CHECK(max_dev > 5.0);
}

TEST_CASE("scene validation rejects out-of-bounds and bad parameters") {
  SceneSpec spec;
  spec.width = 32;
  spec.height = 32;
  SceneFeature f;
  f.x = 2;  // too close to the border for its diameter
  f.y = 16;
  f.diameter_px = 12;
  f.cls = Label::True;
  spec.craters.push_back(f);
  CHECK_THROWS_AS(render_scene(spec, 1), std::invalid_argument);
  spec.craters[0].x = 16;
  spec.craters[0].degradation = 1.5;
  CHECK_THROWS_AS(render_scene(spec, 1), std::invalid_argument);
  spec.craters[0].degradation = 0.5;
  spec.craters[0].diameter_px = 2.0;
  CHECK_THROWS_AS(render_scene(spec, 1), std::invalid_argument);
}

TEST_CASE("degradation-0 crater outscores a degraded copy under DP (oracle)") {
  auto make_scene = [](double degradation) {
    SceneSpec spec;
    spec.width = 96;
    spec.height = 96;
    spec.noise_sigma = 0.0;
    SceneFeature f;
    f.x = 48;
    f.y = 48;
    f.diameter_px = 30;
    f.degradation = degradation;
    f.cls = Label::True;
    spec.craters.push_back(f);
    return render_scene(spec, 3);
  };
  const RenderedScene fresh = make_scene(0.0);
  const RenderedScene eroded = make_scene(0.9);

  ExtractOptions opts;
  opts.min_diameter = 1.0;
  std::vector<GrayRaster> patches{
      extract_patch(fresh.raster, fresh.annotations[0], 45, 30.0, opts)};
  Template tpl = build_appearance_template(patches);
  tpl.target_diameter = 30.0;

  const MatchResult fresh_match = best_match(fresh.raster, fresh.annotations[0], tpl,
                                             Measure::Dp, default_smoothing_schedule(), opts);
  const MatchResult eroded_match = best_match(eroded.raster, eroded.annotations[0], tpl,
                                              Measure::Dp, default_smoothing_schedule(), opts);
  CHECK(fresh_match.best_score > eroded_match.best_score);
}

TEST_CASE("random_scene: empty when rates are zero, deterministic per seed") {
  CountingModelParams params;
  params.lambda_true = 0.0;
  params.lambda_false = 0.0;
  SceneGeometry geom;
  geom.width = 256;
  geom.height = 256;
  CHECK(random_scene(params, geom, 5).craters.empty());

  params.lambda_true = 12.0;
  params.lambda_false = 4.0;
  const SceneSpec a = random_scene(params, geom, 6);
  const SceneSpec b = random_scene(params, geom, 6);
  REQUIRE(a.craters.size() == b.craters.size());
  for (std::size_t i = 0; i < a.craters.size(); ++i) {
    CHECK(a.craters[i].x == b.craters[i].x);
    CHECK(a.craters[i].diameter_px == b.craters[i].diameter_px);
  }
  CHECK_NOTHROW(render_scene(a, 7));  // honours margins by construction
}

TEST_CASE("random_scene: Poisson mean count oracle") {
  CountingModelParams params;
  params.lambda_true = 50.0;
  params.lambda_false = 0.0;
  SceneGeometry geom;
  geom.width = 2048;
  geom.height = 2048;
  double total = 0.0;
  const int scenes = 1000;
  for (int s = 0; s < scenes; ++s)
    total += static_cast<double>(random_scene(params, geom, 1000 + s).craters.size());
  const double mean = total / scenes;
  const double se = std::sqrt(50.0 / scenes);
  CHECK(std::fabs(mean - 50.0) < 3.0 * se);
}

TEST_CASE("random_scene: geometry too small") {
  CountingModelParams params;
  params.lambda_true = 3.0;
  SceneGeometry geom;
  geom.width = 64;
  geom.height = 64;
  geom.min_diameter = 40.0;
  geom.max_diameter = 48.0;
  CHECK_THROWS_AS(random_scene(params, geom, 1), std::invalid_argument);
}

TEST_CASE("random_scene honours diameter range and margins") {
  CountingModelParams params;
  params.lambda_true = 40.0;
  params.lambda_false = 15.0;
  SceneGeometry geom;
  geom.width = 1024;
  geom.height = 1024;
  const SceneSpec spec = random_scene(params, geom, 99);
  for (const SceneFeature& f : spec.craters) {
    CHECK(f.diameter_px >= geom.min_diameter);
    CHECK(f.diameter_px <= geom.max_diameter);
    const double margin = geom.margin_factor * f.diameter_px + geom.margin_px;
    CHECK(f.x >= margin);
    CHECK(f.x <= geom.width - 1.0 - margin);
    CHECK(f.y >= margin);
    CHECK(f.y <= geom.height - 1.0 - margin);
    CHECK(f.degradation >= geom.min_degradation);
    CHECK(f.degradation <= geom.max_degradation);
  }
}
