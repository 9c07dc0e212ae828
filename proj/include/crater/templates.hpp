#pragma once

#include "crater/types.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace crater {

/// Crater template: per-pixel mean appearance (zero local mean), or the two
/// concatenated mean-derivative panels [d/dx | d/dy] (width = 2 x height).
struct Template {
  TemplateKind kind = TemplateKind::Appearance;
  int width = 0;
  int height = 0;
  GrayRaster values;
  int n_examples = 0;
  /// Diameter (px) the example craters were scaled to when the template was
  /// built; candidate patches are rescaled to the same diameter at match time.
  double target_diameter = 0.0;

  /// Side of the square patch this template is scored against.
  int patch_size() const { return height; }
};

/// Best match of one annotation against a template over a smoothing schedule.
struct MatchResult {
  std::int64_t annotation_id = 0;
  Label label = Label::Unknown;
  Measure measure = Measure::Mse;
  TemplateKind template_kind = TemplateKind::Appearance;
  double best_score = 0.0;
  double best_sigma = 0.0;
};

enum class PadMode { Error, Mean };

struct ExtractOptions {
  PadMode pad = PadMode::Error;
  double min_diameter = 20.0;  ///< smallest usable candidate diameter, px
};

/// The 16 logarithmically spaced Gaussian filter widths (px) used for the
/// degradation-matching smoothing search.
const std::vector<double>& default_smoothing_schedule();

/// Gaussian smoothing with reflected borders; sigma in pixels.
GrayRaster gaussian_smooth(const GrayRaster& img, double sigma);

/// Central differences on the interior, one-sided at the edges.
GrayRaster derivative_x(const GrayRaster& img);
GrayRaster derivative_y(const GrayRaster& img);

/// Extracts an out_size x out_size patch centred on the annotation, resampled
/// (bilinear) so the annotated diameter maps to target_diameter. Samples
/// falling outside the raster either raise std::out_of_range (PadMode::Error)
/// or are filled with the mean of the in-bounds samples (PadMode::Mean).
GrayRaster extract_patch(const GrayRaster& raster, const Annotation& ann, int out_size,
                         double target_diameter, const ExtractOptions& opts = {});

/// Mean grey level of each patch is subtracted, then patches are averaged.
Template build_appearance_template(std::span<const GrayRaster> patches);

/// Mean-subtracted patches are differentiated in x and y; the mean panels are
/// concatenated side by side.
Template build_derivative_template(std::span<const GrayRaster> patches);

/// Smooth, subtract the mean, and differentiate (derivative kind only):
/// the image-side preparation applied before either similarity measure.
GrayRaster prepare_patch(const GrayRaster& patch, double sigma, TemplateKind kind);

/// Mean squared residual between template and prepared patch.
template <typename DerivedA, typename DerivedB>
double score_mse(const Eigen::ArrayBase<DerivedA>& tpl, const Eigen::ArrayBase<DerivedB>& patch) {
  if (tpl.rows() != patch.rows() || tpl.cols() != patch.cols())
    throw std::invalid_argument("score_mse: size mismatch");
  return (tpl - patch).square().sum() / static_cast<double>(tpl.size());
}

/// Normalised dot product sum(a b) / (n ||a||); sign carries correlation
/// direction. Throws std::domain_error on a zero-norm template.
template <typename DerivedA, typename DerivedB>
double score_dp(const Eigen::ArrayBase<DerivedA>& tpl, const Eigen::ArrayBase<DerivedB>& patch) {
  if (tpl.rows() != patch.rows() || tpl.cols() != patch.cols())
    throw std::invalid_argument("score_dp: size mismatch");
  const double norm = std::sqrt(tpl.square().sum());
  if (norm <= 0.0) throw std::domain_error("score_dp: zero-norm template");
  return (tpl * patch).sum() / (static_cast<double>(tpl.size()) * norm);
}

/// Scores the annotation at every schedule sigma and keeps the best
/// (minimum for MSE, maximum for DP; earliest sigma wins ties).
MatchResult best_match(const GrayRaster& raster, const Annotation& ann, const Template& tpl,
                       Measure measure, std::span<const double> schedule,
                       const ExtractOptions& opts = {});

/// best_match over a set of annotations (those below min_diameter are skipped).
std::vector<MatchResult> match_all(const GrayRaster& raster,
                                   std::span<const Annotation> annotations, const Template& tpl,
                                   Measure measure, std::span<const double> schedule,
                                   const ExtractOptions& opts = {});

}  // namespace crater
