#include "crater/validate.hpp"

#include "crater/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace crater::validate {

bool Representation::dp_only() const {
  for (int a : axes)
    if (a != kGreyDp && a != kGradDp) return false;
  return true;
}

bool Representation::mse_only() const {
  for (int a : axes)
    if (a != kGreyMse && a != kGradMse) return false;
  return true;
}

std::vector<Representation> default_representations() {
  std::vector<Representation> reps;
  for (int a = 0; a < 4; ++a) reps.push_back({kComboNames[a], {a}});
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      reps.push_back({std::string(kComboNames[a]) + "__" + kComboNames[b], {a, b}});
  return reps;
}

namespace {

// Grid-indexed rectangle sampler over a fixed annotation set.
class RegionSampler {
 public:
  RegionSampler(std::span<const Annotation> annotations, std::vector<std::size_t> subset,
                double raster_w, double raster_h, double region_w, double region_h)
      : annotations_(annotations),
        subset_(std::move(subset)),
        raster_w_(raster_w),
        raster_h_(raster_h),
        region_w_(region_w),
        region_h_(region_h) {
    if (!(region_w_ > 0.0) || !(region_h_ > 0.0))
      throw std::invalid_argument("bootstrap regions: zero-area rectangle");
    if (region_w_ > raster_w_ || region_h_ > raster_h_)
      throw std::invalid_argument("bootstrap regions: rectangle larger than raster");
    cell_w_ = region_w_;
    cell_h_ = region_h_;
    nx_ = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(raster_w_ / cell_w_)));
    ny_ = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(raster_h_ / cell_h_)));
    cells_.resize(static_cast<std::size_t>(nx_ * ny_));
    for (std::size_t idx : subset_) {
      const Annotation& a = annotations_[idx];
      const Eigen::Index cx =
          std::min<Eigen::Index>(nx_ - 1, static_cast<Eigen::Index>(a.x / cell_w_));
      const Eigen::Index cy =
          std::min<Eigen::Index>(ny_ - 1, static_cast<Eigen::Index>(a.y / cell_h_));
      cells_[static_cast<std::size_t>(cy * nx_ + cx)].push_back(idx);
    }
  }

  // Appends the indices inside one uniformly placed rectangle.
  void draw(Rng& rng, std::vector<std::size_t>& out) const {
    const double x0 = rng.uniform(0.0, raster_w_ - region_w_);
    const double y0 = rng.uniform(0.0, raster_h_ - region_h_);
    const double x1 = x0 + region_w_, y1 = y0 + region_h_;
    const Eigen::Index cx0 = static_cast<Eigen::Index>(x0 / cell_w_);
    const Eigen::Index cy0 = static_cast<Eigen::Index>(y0 / cell_h_);
    for (Eigen::Index cy = cy0; cy <= std::min(ny_ - 1, cy0 + 1); ++cy) {
      for (Eigen::Index cx = cx0; cx <= std::min(nx_ - 1, cx0 + 1); ++cx) {
        for (std::size_t idx : cells_[static_cast<std::size_t>(cy * nx_ + cx)]) {
          const Annotation& a = annotations_[idx];
          if (a.x >= x0 && a.x < x1 && a.y >= y0 && a.y < y1) out.push_back(idx);
        }
      }
    }
  }

  std::size_t population() const { return subset_.size(); }

 private:
  std::span<const Annotation> annotations_;
  std::vector<std::size_t> subset_;
  double raster_w_, raster_h_, region_w_, region_h_;
  double cell_w_ = 0.0, cell_h_ = 0.0;
  Eigen::Index nx_ = 0, ny_ = 0;
  std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace

std::vector<std::vector<std::size_t>> bootstrap_regions(std::span<const Annotation> annotations,
                                                        double raster_w, double raster_h,
                                                        double region_w, double region_h,
                                                        double target_count, Rng& rng) {
  if (annotations.empty())
    throw std::runtime_error("bootstrap regions: no annotations, target unreachable");
  std::vector<std::size_t> all(annotations.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  RegionSampler sampler(annotations, std::move(all), raster_w, raster_h, region_w, region_h);

  std::vector<std::vector<std::size_t>> subsets;
  double collected = 0.0;
  long empty_streak = 0;
  std::vector<std::size_t> buf;
  while (collected < target_count) {
    buf.clear();
    sampler.draw(rng, buf);
    if (buf.empty()) {
      if (++empty_streak > 200000)
        throw std::runtime_error("bootstrap regions: target quantity unreachable");
      continue;
    }
    empty_streak = 0;
    collected += static_cast<double>(buf.size());
    subsets.push_back(buf);
  }
  return subsets;
}

namespace {

struct PreparedRep {
  Representation rep;
  HistogramSpec spec;
  std::vector<Eigen::Index> train_bin;  // -1 = out of range
  std::vector<Eigen::Index> test_bin;
};

std::vector<Eigen::Index> bin_lookup(const HistogramSpec& spec, const ScoredPool& pool,
                                     const Representation& rep) {
  std::vector<Eigen::Index> out(pool.annotations.size(), -1);
  std::vector<double> s(rep.axes.size());
  for (std::size_t i = 0; i < pool.annotations.size(); ++i) {
    for (std::size_t a = 0; a < rep.axes.size(); ++a)
      s[a] = pool.scores(static_cast<Eigen::Index>(i), rep.axes[a]);
    if (auto idx = bin_index(spec, s)) out[i] = *idx;
  }
  return out;
}

HistogramSpec spec_for_rep(const ScoredPool& train_pool, const Representation& rep,
                           const ValidationConfig& cfg) {
  HistogramSpec spec;
  for (std::size_t a = 0; a < rep.axes.size(); ++a) {
    const int col = rep.axes[a];
    double lo = train_pool.scores(0, col), hi = lo;
    for (Eigen::Index i = 0; i < train_pool.scores.rows(); ++i) {
      lo = std::min(lo, train_pool.scores(i, col));
      hi = std::max(hi, train_pool.scores(i, col));
    }
    if (!(hi > lo)) throw std::runtime_error("validation: degenerate scores");
    const double span = hi - lo;
    AxisSpec ax;
    ax.measure = (col == kGreyMse || col == kGradMse) ? Measure::Mse : Measure::Dp;
    ax.template_kind =
        (col == kGreyMse || col == kGreyDp) ? TemplateKind::Appearance : TemplateKind::Derivative;
    ax.bin_count = rep.axes.size() == 1 ? cfg.bins_1d : cfg.bins_2d;
    ax.range_lo = lo - cfg.margin * span;
    ax.range_hi = hi + cfg.margin * span;
    spec.axes.push_back(ax);
  }
  return spec;
}

struct TrialOutcome {
  bool ok = false;
  double pull = 0.0;
  double sigma = 0.0;
  double truth = 0.0;
  double est = 0.0;
  double pct_error = 0.0;
};

struct TrialContext {
  const ScoredPool* train_pool = nullptr;
  const ScoredPool* test_pool = nullptr;
  const PreparedRep* rep = nullptr;
  const ValidationConfig* cfg = nullptr;
  const RegionSampler* train_true = nullptr;
  const RegionSampler* train_false = nullptr;
  const RegionSampler* test_all = nullptr;
  double train_true_target = 0.0;
  double train_false_target = 0.0;
  double test_total_target = 0.0;
};

// Collects per-class training samples by rectangle bootstrap (exact quota,
// last rectangle truncated), returning a class histogram over the rep's bins.
ScoreHistogram sample_class_histogram(const TrialContext& ctx, const RegionSampler& sampler,
                                      double target, Rng& rng) {
  ScoreHistogram hist = empty_histogram(ctx.rep->spec);
  double collected = 0.0;
  long empty_streak = 0;
  std::vector<std::size_t> buf;
  while (collected < target) {
    buf.clear();
    sampler.draw(rng, buf);
    if (buf.empty()) {
      if (++empty_streak > 200000)
        throw std::runtime_error("validation: training target unreachable");
      continue;
    }
    empty_streak = 0;
    for (std::size_t idx : buf) {
      const Eigen::Index b = ctx.rep->train_bin[idx];
      if (b >= 0)
        hist.counts[b] += 1.0;
      else
        ++hist.overflow_count;
      if (++collected >= target) break;
    }
  }
  hist.total = hist.counts.sum();
  return hist;
}

TrialOutcome run_trial(const TrialContext& ctx, std::uint64_t trial_seed) {
  const ValidationConfig& cfg = *ctx.cfg;
  TrialOutcome out;

  Rng rng_train_true(derive_seed(trial_seed, 0));
  Rng rng_train_false(derive_seed(trial_seed, 1));
  const ScoreHistogram true_hist =
      sample_class_histogram(ctx, *ctx.train_true, ctx.train_true_target, rng_train_true);
  const ScoreHistogram false_hist =
      sample_class_histogram(ctx, *ctx.train_false, ctx.train_false_target, rng_train_false);

  lpm::TrainOptions topts = cfg.train;
  topts.seed = derive_seed(trial_seed, 2);
  const lpm::LpmModel model = lpm::train({true_hist}, {false_hist}, topts);

  // Test sample: rectangles over the full pool until the target count is hit,
  // redrawn until the realized contamination sits within the accepted band.
  ScoreHistogram test_hist = empty_histogram(ctx.rep->spec);
  double truth_true = 0.0;
  bool accepted = false;
  for (int attempt = 0; attempt < 500 && !accepted; ++attempt) {
    Rng rng(derive_seed(trial_seed, 3 + static_cast<std::uint64_t>(attempt)));
    test_hist = empty_histogram(ctx.rep->spec);
    truth_true = 0.0;
    double n_true = 0.0, n_false = 0.0, collected = 0.0;
    long empty_streak = 0;
    std::vector<std::size_t> buf;
    while (collected < ctx.test_total_target) {
      buf.clear();
      ctx.test_all->draw(rng, buf);
      if (buf.empty()) {
        if (++empty_streak > 200000)
          throw std::runtime_error("validation: test target unreachable");
        continue;
      }
      empty_streak = 0;
      for (std::size_t idx : buf) {
        const bool is_true = ctx.test_pool->annotations[idx].label == Label::True;
        (is_true ? n_true : n_false) += 1.0;
        const Eigen::Index b = ctx.rep->test_bin[idx];
        if (b >= 0) {
          test_hist.counts[b] += 1.0;
          if (is_true) truth_true += 1.0;
        } else {
          ++test_hist.overflow_count;
        }
        if (++collected >= ctx.test_total_target) break;
      }
    }
    const double frac = n_false / std::max(1.0, n_true + n_false);
    accepted = std::fabs(frac - cfg.contamination) <= cfg.contamination_band;
  }
  if (!accepted)
    throw std::runtime_error("validation: contamination target not reachable within band");
  test_hist.total = test_hist.counts.sum();

  const lpm::FitResult fit = lpm::fit_quantities(model, test_hist, std::nullopt, cfg.fit);
  const lpm::QuantityEstimate est = lpm::propagate_errors(model, test_hist, fit.estimate.q);

  const double est_true = est.class_totals[0];
  const double var_true = est.class_covariance(0, 0);
  if (!(var_true > 0.0)) throw std::runtime_error("validation: non-positive predicted variance");
  out.sigma = std::sqrt(var_true);
  out.truth = truth_true;
  out.est = est_true;
  out.pull = (est_true - truth_true) / out.sigma;
  out.pct_error = 100.0 * out.sigma / std::max(1e-12, est_true);
  out.ok = true;
  return out;
}

}  // namespace

ValidationReport run_validation(const ScoredPool& train_pool, const ScoredPool& test_pool,
                                const ValidationConfig& config) {
  if (train_pool.annotations.empty() || test_pool.annotations.empty())
    throw std::invalid_argument("run_validation: empty pools");

  std::vector<std::size_t> train_true_idx, train_false_idx, test_all_idx;
  for (std::size_t i = 0; i < train_pool.annotations.size(); ++i) {
    (train_pool.annotations[i].label == Label::True ? train_true_idx : train_false_idx)
        .push_back(i);
  }
  for (std::size_t i = 0; i < test_pool.annotations.size(); ++i) test_all_idx.push_back(i);
  if (train_true_idx.empty() || train_false_idx.empty())
    throw std::invalid_argument("run_validation: training pool must contain both classes");

  const RegionSampler train_true(train_pool.annotations, train_true_idx, train_pool.raster_width,
                                 train_pool.raster_height, config.region_w, config.region_h);
  const RegionSampler train_false(train_pool.annotations, train_false_idx,
                                  train_pool.raster_width, train_pool.raster_height,
                                  config.region_w, config.region_h);
  const RegionSampler test_all(test_pool.annotations, test_all_idx, test_pool.raster_width,
                               test_pool.raster_height, config.region_w, config.region_h);

  const double train_total = config.train_target > 0
                                 ? static_cast<double>(config.train_target)
                                 : static_cast<double>(train_pool.annotations.size());
  const double true_share = static_cast<double>(train_true_idx.size()) /
                            static_cast<double>(train_pool.annotations.size());

  std::vector<Representation> reps = default_representations();
  ValidationReport report;

  for (std::size_t r = 0; r < reps.size(); ++r) {
    PreparedRep prep;
    prep.rep = reps[r];
    prep.spec = spec_for_rep(train_pool, reps[r], config);
    prep.train_bin = bin_lookup(prep.spec, train_pool, reps[r]);
    prep.test_bin = bin_lookup(prep.spec, test_pool, reps[r]);

    TrialContext ctx;
    ctx.train_pool = &train_pool;
    ctx.test_pool = &test_pool;
    ctx.rep = &prep;
    ctx.cfg = &config;
    ctx.train_true = &train_true;
    ctx.train_false = &train_false;
    ctx.test_all = &test_all;
    ctx.train_true_target = std::round(train_total * true_share);
    ctx.train_false_target = std::round(train_total * (1.0 - true_share));

    for (std::size_t j = 0; j < config.data_ratios.size(); ++j) {
      const double ratio = config.data_ratios[j];
      ctx.test_total_target = std::max(4.0, std::round(ratio * train_total));

      std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(config.trials));
      const int threads =
          config.threads > 0 ? config.threads
                             : std::max(1u, std::thread::hardware_concurrency());
      auto worker = [&](int begin, int end) {
        for (int t = begin; t < end; ++t) {
          const std::uint64_t trial_seed =
              derive_seed(config.seed, static_cast<std::uint64_t>(r),
                          static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(t));
          try {
            outcomes[static_cast<std::size_t>(t)] = run_trial(ctx, trial_seed);
          } catch (const std::exception&) {
            outcomes[static_cast<std::size_t>(t)].ok = false;
          }
        }
      };
      if (threads <= 1) {
        worker(0, config.trials);
      } else {
        std::vector<std::thread> pool;
        const int chunk = (config.trials + threads - 1) / threads;
        for (int t0 = 0; t0 < config.trials; t0 += chunk)
          pool.emplace_back(worker, t0, std::min(config.trials, t0 + chunk));
        for (std::thread& th : pool) th.join();
      }

      ValidationRow row;
      row.representation = reps[r].name;
      row.dims = static_cast<int>(reps[r].axes.size());
      row.ratio = ratio;
      row.trials = config.trials;
      double sum_pull = 0.0, sum_pull2 = 0.0, sum_pct = 0.0, sum_sigma = 0.0, sum_truth = 0.0,
             sum_est = 0.0, sum_multiple = 0.0;
      int ok = 0;
      for (const TrialOutcome& o : outcomes) {
        if (!o.ok) {
          ++row.failed;
          continue;
        }
        ++ok;
        sum_pull += o.pull;
        sum_pull2 += o.pull * o.pull;
        sum_pct += o.pct_error;
        sum_sigma += o.sigma;
        sum_truth += o.truth;
        sum_est += o.est;
        sum_multiple += o.sigma / std::sqrt(std::max(1.0, o.truth));
      }
      if (ok >= 2) {
        row.pull_mean = sum_pull / ok;
        row.pull_std =
            std::sqrt(std::max(0.0, (sum_pull2 - sum_pull * sum_pull / ok) / (ok - 1)));
        row.mean_pct_error = sum_pct / ok;
        row.mean_pred_sigma = sum_sigma / ok;
        row.mean_true_total = sum_truth / ok;
        row.mean_est_total = sum_est / ok;
        row.poisson_multiple = sum_multiple / ok;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

void write_report_csv(const std::string& path, const ValidationReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "representation,dims,ratio,trials,failed,pull_mean,pull_std,mean_pct_error,"
         "mean_pred_sigma,mean_true_total,mean_est_total,poisson_multiple\n";
  for (const ValidationRow& r : report.rows) {
    out << r.representation << ',' << r.dims << ',' << io::num17(r.ratio) << ',' << r.trials
        << ',' << r.failed << ',' << io::num17(r.pull_mean) << ',' << io::num17(r.pull_std)
        << ',' << io::num17(r.mean_pct_error) << ',' << io::num17(r.mean_pred_sigma) << ','
        << io::num17(r.mean_true_total) << ',' << io::num17(r.mean_est_total) << ','
        << io::num17(r.poisson_multiple) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing CSV: " + path);
}

std::array<double, 4> score_annotation(const GrayRaster& raster, const Annotation& ann,
                                       const Template& appearance, const Template& derivative,
                                       std::span<const double> schedule) {
  if (appearance.patch_size() != derivative.patch_size())
    throw std::invalid_argument("score_annotation: template sizes differ");
  ExtractOptions opts;
  opts.min_diameter = 0.0;  // caller filters
  const double target = appearance.target_diameter > 0.0
                            ? appearance.target_diameter
                            : 2.0 * appearance.patch_size() / 3.0;
  const GrayRaster patch =
      extract_patch(raster, ann, appearance.patch_size(), target, opts);

  std::array<double, 4> best{};
  bool first = true;
  for (double sigma : schedule) {
    GrayRaster smoothed = gaussian_smooth(patch, sigma);
    smoothed -= smoothed.mean();
    GrayRaster deriv(smoothed.rows(), 2 * smoothed.cols());
    deriv.leftCols(smoothed.cols()) = derivative_x(smoothed);
    deriv.rightCols(smoothed.cols()) = derivative_y(smoothed);
    const double grey_mse = score_mse(appearance.values, smoothed);
    const double grad_mse = score_mse(derivative.values, deriv);
    const double grey_dp = score_dp(appearance.values, smoothed);
    const double grad_dp = score_dp(derivative.values, deriv);
    if (first) {
      best = {grey_mse, grad_mse, grey_dp, grad_dp};
      first = false;
    } else {
      best[kGreyMse] = std::min(best[kGreyMse], grey_mse);
      best[kGradMse] = std::min(best[kGradMse], grad_mse);
      best[kGreyDp] = std::max(best[kGreyDp], grey_dp);
      best[kGradDp] = std::max(best[kGradDp], grad_dp);
    }
  }
  return best;
}

namespace {

ScoredPool score_scene(const RenderedScene& scene, const Template& appearance,
                       const Template& derivative, double min_diameter) {
  ScoredPool pool;
  pool.raster_width = static_cast<double>(scene.raster.cols());
  pool.raster_height = static_cast<double>(scene.raster.rows());
  std::vector<std::array<double, 4>> scores;
  const std::vector<double>& schedule = default_smoothing_schedule();
  for (const Annotation& ann : scene.annotations) {
    if (ann.diameter_px < min_diameter) continue;
    pool.annotations.push_back(ann);
    scores.push_back(score_annotation(scene.raster, ann, appearance, derivative, schedule));
  }
  pool.scores.resize(static_cast<Eigen::Index>(scores.size()), 4);
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (int c = 0; c < 4; ++c) pool.scores(static_cast<Eigen::Index>(i), c) = scores[i][c];
  return pool;
}

}  // namespace

SyntheticDataset build_synthetic_dataset(const SyntheticDataConfig& config) {
  CountingModelParams params;
  params.lambda_true = config.lambda_true;
  params.lambda_false = config.lambda_false;

  SceneGeometry geom = config.geometry;
  geom.width = config.scene_width;
  geom.height = config.scene_height;

  SyntheticDataset out;
  RenderedScene test_scene;
  {
    SceneSpec train_spec = random_scene(params, geom, derive_seed(config.seed, 10));
    train_spec.noise_sigma = config.noise_sigma;
    train_spec.background_level = config.background_level;
    train_spec.sun_azimuth_deg = config.sun_azimuth_deg;
    train_spec.feature_amplitude = config.feature_amplitude;
    RenderedScene train_scene = render_scene(train_spec, derive_seed(config.seed, 11));

    // Templates come from the training scene's true craters.
    std::vector<GrayRaster> patches;
    ExtractOptions eopts;
    eopts.min_diameter = config.min_diameter;
    for (const Annotation& ann : train_scene.annotations) {
      if (ann.label != Label::True || ann.diameter_px < config.min_diameter) continue;
      patches.push_back(extract_patch(train_scene.raster, ann, config.template_size,
                                      config.template_target_diameter, eopts));
      if (static_cast<int>(patches.size()) >= config.template_examples) break;
    }
    if (patches.empty()) throw std::runtime_error("build_synthetic_dataset: no template examples");
    out.appearance = build_appearance_template(patches);
    out.appearance.target_diameter = config.template_target_diameter;
    out.derivative = build_derivative_template(patches);
    out.derivative.target_diameter = config.template_target_diameter;

    out.train = score_scene(train_scene, out.appearance, out.derivative, config.min_diameter);
  }
  {
    SceneSpec test_spec = random_scene(params, geom, derive_seed(config.seed, 20));
    test_spec.noise_sigma = config.noise_sigma;
    test_spec.background_level = config.background_level;
    test_spec.sun_azimuth_deg = config.sun_azimuth_deg;
    test_spec.feature_amplitude = config.feature_amplitude;
    test_scene = render_scene(test_spec, derive_seed(config.seed, 21));
    out.test = score_scene(test_scene, out.appearance, out.derivative, config.min_diameter);
  }
  return out;
}

}  // namespace crater::validate
