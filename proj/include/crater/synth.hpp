#pragma once

#include "crater/counting_model.hpp"
#include "crater/types.hpp"

#include <cstdint>
#include <vector>

namespace crater {

/// One renderable feature of a synthetic scene.
struct SceneFeature {
  double x = 0.0;
  double y = 0.0;
  double diameter_px = 0.0;
  double degradation = 0.0;  ///< 0 = fresh, 1 = fully eroded
  Label cls = Label::True;
  double contrast = 1.0;  ///< per-feature amplitude multiplier
  int false_kind = -1;    ///< false-feature shape (0 crescent, 1 dome, 2 ring); -1 = by index
};

/// Full description of a synthetic scene. True craters render as illuminated
/// bowls; false features render as crescent ridges or shaded blobs that only
/// partially resemble craters.
struct SceneSpec {
  int width = 0;
  int height = 0;
  double sun_azimuth_deg = 45.0;
  std::vector<SceneFeature> craters;
  double noise_sigma = 0.0;
  double background_level = 128.0;
  double feature_amplitude = 26.0;  ///< grey-level scale of feature shading

  void validate() const;
};

/// Geometry and feature-parameter ranges for random scene generation.
struct SceneGeometry {
  int width = 0;
  int height = 0;
  double min_diameter = 24.0;
  double max_diameter = 56.0;  ///< diameters drawn log-uniformly in range
  double min_degradation = 0.05;
  double max_degradation = 0.85;
  /// Feature centres keep margin_factor * diameter + margin_px clear of the
  /// borders so a 60px patch at 40px target diameter never leaves the raster.
  double margin_factor = 0.75;
  double margin_px = 4.0;
};

struct RenderedScene {
  GrayRaster raster;
  std::vector<Annotation> annotations;
};

/// Renders the scene deterministically for a given seed (the seed only feeds
/// the additive Gaussian pixel noise).
RenderedScene render_scene(const SceneSpec& spec, std::uint64_t seed);

/// Draws Poisson numbers of true/false features with uniform positions
/// (rejection-sampled to honour margins) and log-uniform diameters.
SceneSpec random_scene(const CountingModelParams& params, const SceneGeometry& geometry,
                       std::uint64_t seed);

}  // namespace crater
