#pragma once

#include "crater/lpm.hpp"
#include "crater/rng.hpp"
#include "crater/scores.hpp"
#include "crater/synth.hpp"
#include "crater/templates.hpp"
#include "crater/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace crater::validate {

/// Score-column order used throughout the harness.
inline constexpr int kGreyMse = 0;
inline constexpr int kGradMse = 1;
inline constexpr int kGreyDp = 2;
inline constexpr int kGradDp = 3;
inline constexpr std::array<const char*, 4> kComboNames = {"grey_mse", "grad_mse", "grey_dp",
                                                           "grad_dp"};

/// A histogram representation: one or two of the four score combos.
struct Representation {
  std::string name;
  std::vector<int> axes;  // indices into the score columns

  bool dp_only() const;
  bool mse_only() const;
};

/// The 4 one-dimensional plus 6 two-dimensional representations.
std::vector<Representation> default_representations();

/// Labelled annotations with their four match scores, plus the raster extent
/// they were measured on.
struct ScoredPool {
  std::vector<Annotation> annotations;
  Matrix scores;  // n x 4, columns per kComboNames
  double raster_width = 0.0;
  double raster_height = 0.0;
};

/// Draws random rectangles (uniform over the raster, with replacement) and
/// collects the annotations inside each, until the summed subset sizes reach
/// target_count. Returns one index subset per rectangle.
std::vector<std::vector<std::size_t>> bootstrap_regions(std::span<const Annotation> annotations,
                                                        double raster_w, double raster_h,
                                                        double region_w, double region_h,
                                                        double target_count, Rng& rng);

struct ValidationConfig {
  int trials = 1000;
  std::vector<double> data_ratios = {0.01, 0.1, 1.0, 10.0, 100.0};
  double region_w = 160.0;
  double region_h = 160.0;
  double contamination = 0.25;
  double contamination_band = 0.02;  ///< accepted |fraction - target|
  std::uint64_t seed = 1;
  int threads = 0;  ///< 0 = hardware concurrency
  int bins_1d = 64;
  int bins_2d = 32;
  double margin = 0.05;
  int train_target = 0;  ///< per-trial training sample size; 0 = train pool size
  lpm::TrainOptions train;
  lpm::EmOptions fit;
};

struct ValidationRow {
  std::string representation;
  int dims = 0;
  double ratio = 0.0;
  int trials = 0;
  int failed = 0;
  double pull_mean = 0.0;
  double pull_std = 0.0;
  double mean_pct_error = 0.0;   ///< mean of 100 sigma / estimate
  double mean_pred_sigma = 0.0;  ///< mean predicted sigma on the true total
  double mean_true_total = 0.0;  ///< mean realized in-range true count
  double mean_est_total = 0.0;
  double poisson_multiple = 0.0;  ///< mean sigma / sqrt(true total)
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
};

/// Runs the bootstrap protocol: for every representation and data ratio,
/// `trials` rounds of (resample training data, train, resample test data,
/// fit, propagate errors), recording pulls and predicted accuracies against
/// the realized in-range class totals of each sample.
ValidationReport run_validation(const ScoredPool& train_pool, const ScoredPool& test_pool,
                                const ValidationConfig& config);

void write_report_csv(const std::string& path, const ValidationReport& report);

/// Synthetic end-to-end dataset: two rendered scenes (train/test), templates
/// built from the training scene, and all four scores per annotation.
struct SyntheticDataConfig {
  int scene_width = 3072;
  int scene_height = 3072;
  double lambda_true = 2300.0;
  double lambda_false = 780.0;
  double noise_sigma = 7.0;
  double background_level = 120.0;
  double sun_azimuth_deg = 45.0;
  double feature_amplitude = 26.0;
  SceneGeometry geometry{.width = 3072, .height = 3072};
  int template_size = 60;
  double template_target_diameter = 40.0;
  int template_examples = 400;  ///< true craters used to build the templates
  double min_diameter = 20.0;
  std::uint64_t seed = 1;
};

struct SyntheticDataset {
  ScoredPool train;
  ScoredPool test;
  Template appearance;
  Template derivative;
};

SyntheticDataset build_synthetic_dataset(const SyntheticDataConfig& config);

/// All four scores of one annotation in one pass (smoothed patches shared
/// between the appearance and derivative templates). Equivalent to four
/// best_match calls.
std::array<double, 4> score_annotation(const GrayRaster& raster, const Annotation& ann,
                                       const Template& appearance, const Template& derivative,
                                       std::span<const double> schedule);

}  // namespace crater::validate
