#include "crater/templates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace crater {

const std::vector<double>& default_smoothing_schedule() {
  static const std::vector<double> schedule = {0.10, 0.12, 0.14, 0.17, 0.21, 0.25, 0.30, 0.36,
                                               0.43, 0.52, 0.62, 0.74, 0.89, 1.07, 1.28, 1.54};
  return schedule;
}

namespace {

// Reflect an index into [0, n): ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
inline Eigen::Index reflect(Eigen::Index i, Eigen::Index n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

GrayRaster gaussian_smooth(const GrayRaster& img, double sigma) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("gaussian_smooth: sigma must be >= 0");
  if (sigma == 0.0) return img;
  const std::vector<double> kernel = gaussian_kernel(sigma);
  const Eigen::Index radius = static_cast<Eigen::Index>(kernel.size() / 2);
  const Eigen::Index rows = img.rows(), cols = img.cols();

  GrayRaster tmp(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (Eigen::Index t = -radius; t <= radius; ++t)
        acc += kernel[static_cast<std::size_t>(t + radius)] * img(r, reflect(c + t, cols));
      tmp(r, c) = acc;
    }
  }
  GrayRaster out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (Eigen::Index t = -radius; t <= radius; ++t)
        acc += kernel[static_cast<std::size_t>(t + radius)] * tmp(reflect(r + t, rows), c);
      out(r, c) = acc;
    }
  }
  return out;
}

GrayRaster derivative_x(const GrayRaster& img) {
  const Eigen::Index rows = img.rows(), cols = img.cols();
  if (cols < 2) throw std::invalid_argument("derivative_x: need at least 2 columns");
  GrayRaster out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    out(r, 0) = img(r, 1) - img(r, 0);
    for (Eigen::Index c = 1; c + 1 < cols; ++c) out(r, c) = 0.5 * (img(r, c + 1) - img(r, c - 1));
    out(r, cols - 1) = img(r, cols - 1) - img(r, cols - 2);
  }
  return out;
}

GrayRaster derivative_y(const GrayRaster& img) {
  const Eigen::Index rows = img.rows(), cols = img.cols();
  if (rows < 2) throw std::invalid_argument("derivative_y: need at least 2 rows");
  GrayRaster out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    out(0, c) = img(1, c) - img(0, c);
    for (Eigen::Index r = 1; r + 1 < rows; ++r) out(r, c) = 0.5 * (img(r + 1, c) - img(r - 1, c));
    out(rows - 1, c) = img(rows - 1, c) - img(rows - 2, c);
  }
  return out;
}

GrayRaster extract_patch(const GrayRaster& raster, const Annotation& ann, int out_size,
                         double target_diameter, const ExtractOptions& opts) {
  if (out_size < 2) throw std::invalid_argument("extract_patch: out_size must be >= 2");
  if (!(target_diameter > 0.0))
    throw std::invalid_argument("extract_patch: target_diameter must be positive");
  if (!(ann.diameter_px >= opts.min_diameter))
    throw std::invalid_argument("extract_patch: annotation " + std::to_string(ann.id) +
                                " below minimum diameter");
  if (ann.x < 0.0 || ann.x > static_cast<double>(raster.cols() - 1) || ann.y < 0.0 ||
      ann.y > static_cast<double>(raster.rows() - 1))
    throw std::out_of_range("extract_patch: annotation " + std::to_string(ann.id) +
                            " centre outside raster");

  const double scale = ann.diameter_px / target_diameter;
  const double half = 0.5 * static_cast<double>(out_size - 1);
  GrayRaster out(out_size, out_size);
  ImageT<bool> valid(out_size, out_size);
  double in_sum = 0.0;
  long in_count = 0;
  for (int i = 0; i < out_size; ++i) {
    const double sy = ann.y + (static_cast<double>(i) - half) * scale;
    for (int j = 0; j < out_size; ++j) {
      const double sx = ann.x + (static_cast<double>(j) - half) * scale;
      const bool inside = sx >= 0.0 && sx <= static_cast<double>(raster.cols() - 1) &&
                          sy >= 0.0 && sy <= static_cast<double>(raster.rows() - 1);
      valid(i, j) = inside;
      if (!inside) {
        if (opts.pad == PadMode::Error)
          throw std::out_of_range("extract_patch: annotation " + std::to_string(ann.id) +
                                  " patch exceeds raster bounds");
        out(i, j) = 0.0;
        continue;
      }
      const Eigen::Index x0 = static_cast<Eigen::Index>(std::floor(sx));
      const Eigen::Index y0 = static_cast<Eigen::Index>(std::floor(sy));
      const Eigen::Index x1 = std::min(x0 + 1, raster.cols() - 1);
      const Eigen::Index y1 = std::min(y0 + 1, raster.rows() - 1);
      const double fx = sx - static_cast<double>(x0);
      const double fy = sy - static_cast<double>(y0);
      const double v = (1.0 - fy) * ((1.0 - fx) * raster(y0, x0) + fx * raster(y0, x1)) +
                       fy * ((1.0 - fx) * raster(y1, x0) + fx * raster(y1, x1));
      out(i, j) = v;
      in_sum += v;
      ++in_count;
    }
  }
  if (in_count == 0) throw std::out_of_range("extract_patch: no in-bounds samples");
  if (in_count < out.size()) {
    const double fill = in_sum / static_cast<double>(in_count);
    for (int i = 0; i < out_size; ++i)
      for (int j = 0; j < out_size; ++j)
        if (!valid(i, j)) out(i, j) = fill;
  }
  return out;
}

namespace {

void check_patch_set(std::span<const GrayRaster> patches) {
  if (patches.empty()) throw std::invalid_argument("template build: no patches");
  for (const GrayRaster& p : patches) {
    if (p.rows() != patches[0].rows() || p.cols() != patches[0].cols())
      throw std::invalid_argument("template build: patch size mismatch");
  }
}

}  // namespace

Template build_appearance_template(std::span<const GrayRaster> patches) {
  check_patch_set(patches);
  GrayRaster acc = GrayRaster::Zero(patches[0].rows(), patches[0].cols());
  for (const GrayRaster& p : patches) acc += p - p.mean();
  acc /= static_cast<double>(patches.size());
  acc -= acc.mean();  // keeps the zero-mean invariant exact against fp drift
  Template tpl;
  tpl.kind = TemplateKind::Appearance;
  tpl.height = static_cast<int>(acc.rows());
  tpl.width = static_cast<int>(acc.cols());
  tpl.values = std::move(acc);
  tpl.n_examples = static_cast<int>(patches.size());
  tpl.target_diameter = 2.0 * tpl.height / 3.0;
  return tpl;
}

Template build_derivative_template(std::span<const GrayRaster> patches) {
  check_patch_set(patches);
  const Eigen::Index rows = patches[0].rows(), cols = patches[0].cols();
  GrayRaster acc_x = GrayRaster::Zero(rows, cols);
  GrayRaster acc_y = GrayRaster::Zero(rows, cols);
  for (const GrayRaster& p : patches) {
    const GrayRaster centred = p - p.mean();
    acc_x += derivative_x(centred);
    acc_y += derivative_y(centred);
  }
  acc_x /= static_cast<double>(patches.size());
  acc_y /= static_cast<double>(patches.size());
  Template tpl;
  tpl.kind = TemplateKind::Derivative;
  tpl.height = static_cast<int>(rows);
  tpl.width = static_cast<int>(2 * cols);
  tpl.values.resize(rows, 2 * cols);
  tpl.values.leftCols(cols) = acc_x;
  tpl.values.rightCols(cols) = acc_y;
  tpl.n_examples = static_cast<int>(patches.size());
  tpl.target_diameter = 2.0 * tpl.height / 3.0;
  return tpl;
}

GrayRaster prepare_patch(const GrayRaster& patch, double sigma, TemplateKind kind) {
  GrayRaster smoothed = gaussian_smooth(patch, sigma);
  smoothed -= smoothed.mean();
  if (kind == TemplateKind::Appearance) return smoothed;
  GrayRaster out(smoothed.rows(), 2 * smoothed.cols());
  out.leftCols(smoothed.cols()) = derivative_x(smoothed);
  out.rightCols(smoothed.cols()) = derivative_y(smoothed);
  return out;
}

MatchResult best_match(const GrayRaster& raster, const Annotation& ann, const Template& tpl,
                       Measure measure, std::span<const double> schedule,
                       const ExtractOptions& opts) {
  if (schedule.empty()) throw std::invalid_argument("best_match: empty smoothing schedule");
  const double target = tpl.target_diameter > 0.0 ? tpl.target_diameter
                                                   : 2.0 * tpl.patch_size() / 3.0;
  const GrayRaster patch = extract_patch(raster, ann, tpl.patch_size(), target, opts);
  MatchResult result;
  result.annotation_id = ann.id;
  result.label = ann.label;
  result.measure = measure;
  result.template_kind = tpl.kind;
  bool first = true;
  for (double sigma : schedule) {
    const GrayRaster prepared = prepare_patch(patch, sigma, tpl.kind);
    const double s = measure == Measure::Mse ? score_mse(tpl.values, prepared)
                                             : score_dp(tpl.values, prepared);
    const bool better = first || (measure == Measure::Mse ? s < result.best_score
                                                          : s > result.best_score);
    if (better) {
      result.best_score = s;
      result.best_sigma = sigma;
      first = false;
    }
  }
  return result;
}

std::vector<MatchResult> match_all(const GrayRaster& raster,
                                   std::span<const Annotation> annotations, const Template& tpl,
                                   Measure measure, std::span<const double> schedule,
                                   const ExtractOptions& opts) {
  std::vector<MatchResult> out;
  out.reserve(annotations.size());
  for (const Annotation& ann : annotations) {
    if (ann.diameter_px < opts.min_diameter) continue;
    out.push_back(best_match(raster, ann, tpl, measure, schedule, opts));
  }
  return out;
}

}  // namespace crater
