#include "crater/synth.hpp"

#include "crater/rng.hpp"
#include "crater/templates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crater {

void SceneSpec::validate() const {
  if (width < 8 || height < 8) throw std::invalid_argument("scene: raster too small");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("scene: noise_sigma must be >= 0");
  for (const SceneFeature& f : craters) {
    if (!(f.diameter_px >= 4.0)) throw std::invalid_argument("scene: diameters must be >= 4 px");
    if (!(f.degradation >= 0.0 && f.degradation <= 1.0))
      throw std::invalid_argument("scene: degradation must be in [0,1]");
    const double r = 0.5 * f.diameter_px;
    if (f.x - r < 0.0 || f.x + r > width - 1.0 || f.y - r < 0.0 || f.y + r > height - 1.0)
      throw std::invalid_argument("scene: feature not fully inside image bounds");
    if (f.cls == Label::Unknown)
      throw std::invalid_argument("scene: features must be labelled true or false");
  }
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// Height-field shading: intensity ~ gradient projected on the sun direction.
// True craters are parabolic bowls with a raised rim; the three false-feature
// shapes below share parts of that signature without the full bowl+rim pair.
struct Sprite {
  GrayRaster img;   // additive grey levels
  int half = 0;     // sprite half-size, px
};

// Index of the false-feature shape cycle; chosen per feature by random_scene
// via the contrast jitter stream, recomputed here from the feature id stream.
enum class FalseShape { Crescent, Dome, Ring };

Sprite render_feature(const SceneFeature& f, double sun_x, double sun_y, double amplitude,
                      FalseShape shape) {
  const double radius = 0.5 * f.diameter_px;
  const double blur_sigma = 0.15 * f.degradation * f.diameter_px;
  const int half =
      static_cast<int>(std::ceil(0.8 * f.diameter_px + 3.0 * blur_sigma)) + 2;
  const int n = 2 * half + 1;
  GrayRaster img = GrayRaster::Zero(n, n);

  const double amp = amplitude * f.contrast;
  for (int iy = 0; iy < n; ++iy) {
    const double dy = static_cast<double>(iy - half);
    for (int ix = 0; ix < n; ++ix) {
      const double dx = static_cast<double>(ix - half);
      const double rho = std::sqrt(dx * dx + dy * dy);
      if (rho > 1.45 * radius) continue;
      const double ux = rho > 0.0 ? dx / rho : 0.0;
      const double uy = rho > 0.0 ? dy / rho : 0.0;
      const double toward_sun = ux * sun_x + uy * sun_y;
      double slope = 0.0;  // radial d(height)/d(rho), in units of crater depth
      double value = 0.0;
      if (f.cls == Label::True) {
        // Bowl: h = -(1 - (rho/R)^2) for rho < R, rim decays linearly outside.
        if (rho <= radius) {
          slope = 2.0 * rho / (radius * radius);
        } else if (rho <= 1.35 * radius) {
          slope = -1.4 / radius * (1.0 - (rho - radius) / (0.35 * radius));
        }
        value = amp * 0.5 * radius * slope * toward_sun;
      } else if (shape == FalseShape::Crescent) {
        // Bright limb arc on the sunward side only; no opposing shadow bowl.
        const double band = std::exp(-0.5 * std::pow((rho - radius) / (0.22 * radius), 2.0));
        const double arc = std::max(0.0, toward_sun);
        value = amp * 0.95 * band * arc * arc;
      } else if (shape == FalseShape::Dome) {
        // Smooth shaded swell: dipole like a crater at low frequency but
        // without any rim structure. Height h = exp(-rho^2 / (2 (0.55R)^2)).
        const double s = 0.55 * radius;
        slope = -rho / (s * s) * std::exp(-0.5 * (rho / s) * (rho / s));
        value = -amp * 0.62 * radius * slope * toward_sun;
      } else {
        // Sharp ring ridge: rim-like high-frequency edges, shaded both sides,
        // with no interior bowl. h = exp(-((rho-0.75R)/w)^2), w small.
        const double w = 0.10 * radius;
        const double d = (rho - 0.75 * radius) / w;
        slope = -2.0 * d / w * std::exp(-d * d);
        value = amp * 0.16 * radius * slope * toward_sun;
      }
      img(iy, ix) += value;
    }
  }
  if (blur_sigma > 0.05) img = gaussian_smooth(img, blur_sigma);
  return Sprite{std::move(img), half};
}

FalseShape false_shape_for(const SceneFeature& f, std::size_t index) {
  if (f.false_kind >= 0) return static_cast<FalseShape>(f.false_kind % 3);
  return static_cast<FalseShape>(index % 3);
}

}  // namespace

RenderedScene render_scene(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  RenderedScene scene;
  scene.raster = GrayRaster::Constant(spec.height, spec.width, spec.background_level);

  const double az = spec.sun_azimuth_deg * kPi / 180.0;
  const double sun_x = std::cos(az);
  const double sun_y = -std::sin(az);  // image rows grow downward

  scene.annotations.reserve(spec.craters.size());
  for (std::size_t i = 0; i < spec.craters.size(); ++i) {
    const SceneFeature& f = spec.craters[i];
    const Sprite sprite = render_feature(f, sun_x, sun_y, spec.feature_amplitude,
                                         false_shape_for(f, i));
    const int cx = static_cast<int>(std::lround(f.x));
    const int cy = static_cast<int>(std::lround(f.y));
    for (int iy = 0; iy < sprite.img.rows(); ++iy) {
      const int ry = cy - sprite.half + iy;
      if (ry < 0 || ry >= spec.height) continue;
      for (int ix = 0; ix < sprite.img.cols(); ++ix) {
        const int rx = cx - sprite.half + ix;
        if (rx < 0 || rx >= spec.width) continue;
        scene.raster(ry, rx) += sprite.img(iy, ix);
      }
    }
    Annotation ann;
    ann.id = static_cast<std::int64_t>(i);
    ann.x = f.x;
    ann.y = f.y;
    ann.diameter_px = f.diameter_px;
    ann.label = f.cls;
    scene.annotations.push_back(ann);
  }

  if (spec.noise_sigma > 0.0) {
    Rng rng(seed);
    double* data = scene.raster.data();
    const Eigen::Index count = scene.raster.size();
    for (Eigen::Index i = 0; i < count; ++i) data[i] += spec.noise_sigma * rng.gauss();
  }
  return scene;
}

SceneSpec random_scene(const CountingModelParams& params, const SceneGeometry& geometry,
                       std::uint64_t seed) {
  params.validate();
  if (geometry.width < 8 || geometry.height < 8)
    throw std::invalid_argument("random_scene: raster too small");
  if (!(geometry.min_diameter >= 4.0) || !(geometry.max_diameter >= geometry.min_diameter))
    throw std::invalid_argument("random_scene: bad diameter range");

  const double max_margin =
      geometry.margin_factor * geometry.max_diameter + geometry.margin_px;
  if (2.0 * max_margin >= geometry.width - 1.0 || 2.0 * max_margin >= geometry.height - 1.0)
    throw std::invalid_argument("random_scene: geometry too small to place features");

  Rng rng(seed);
  SceneSpec spec;
  spec.width = geometry.width;
  spec.height = geometry.height;

  const long n_true = rng.poisson(params.lambda_true);
  const long n_false = rng.poisson(params.lambda_false);
  const double log_lo = std::log(geometry.min_diameter);
  const double log_hi = std::log(geometry.max_diameter);

  long false_index = 0;
  for (long i = 0; i < n_true + n_false; ++i) {
    SceneFeature f;
    f.cls = i < n_true ? Label::True : Label::False;
    f.diameter_px = std::exp(rng.uniform(log_lo, log_hi));
    f.degradation = rng.uniform(geometry.min_degradation, geometry.max_degradation);
    f.contrast = std::exp(0.25 * rng.gauss());
    if (f.cls == Label::False) f.false_kind = static_cast<int>(false_index++ % 3);
    const double margin = geometry.margin_factor * f.diameter_px + geometry.margin_px;
    // Rejection sampling over the full raster keeps positions uniform.
    for (;;) {
      f.x = rng.uniform(0.0, static_cast<double>(geometry.width - 1));
      f.y = rng.uniform(0.0, static_cast<double>(geometry.height - 1));
      if (f.x >= margin && f.x <= geometry.width - 1.0 - margin && f.y >= margin &&
          f.y <= geometry.height - 1.0 - margin)
        break;
    }
    spec.craters.push_back(f);
  }
  return spec;
}

}  // namespace crater
