#include "crater/lpm.hpp"

#include "crater/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crater::lpm {

int LpmModel::total_components() const {
  int n = 0;
  for (const ClassModel& c : classes) n += c.component_count();
  return n;
}

Matrix LpmModel::component_matrix() const {
  const Eigen::Index bins = spec.total_bins();
  Matrix P(bins, total_components());
  Eigen::Index col = 0;
  for (const ClassModel& c : classes) {
    P.middleCols(col, c.component_count()) = c.components;
    col += c.component_count();
  }
  return P;
}

std::vector<std::pair<int, int>> LpmModel::class_ranges() const {
  std::vector<std::pair<int, int>> ranges;
  int begin = 0;
  for (const ClassModel& c : classes) {
    ranges.emplace_back(begin, begin + c.component_count());
    begin += c.component_count();
  }
  return ranges;
}

namespace {

std::vector<Eigen::Index> occupied_bins(const Vector& counts) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < counts.size(); ++i)
    if (counts[i] > 0.0) idx.push_back(i);
  return idx;
}

}  // namespace

double eml_log_likelihood(const Matrix& components, const Vector& q,
                          const ScoreHistogram& hist) {
  if (components.rows() != hist.counts.size())
    throw std::invalid_argument("eml_log_likelihood: bin count mismatch");
  if (components.cols() != q.size())
    throw std::invalid_argument("eml_log_likelihood: component count mismatch");
  if ((q.array() < 0.0).any())
    throw std::invalid_argument("eml_log_likelihood: quantities must be >= 0");
  double obj = -q.sum();
  std::string bad;
  int bad_count = 0;
  for (Eigen::Index x = 0; x < hist.counts.size(); ++x) {
    const double h = hist.counts[x];
    if (h <= 0.0) continue;
    const double d = components.row(x).dot(q.transpose());
    if (d <= 0.0) {
      if (bad_count < 8) bad += (bad.empty() ? "" : ", ") + std::to_string(x);
      ++bad_count;
      continue;
    }
    obj += h * std::log(d);
  }
  if (bad_count > 0)
    throw std::domain_error("eml_log_likelihood: occupied bins with zero model density: [" +
                            bad + (bad_count > 8 ? ", ..." : "") + "]");
  return obj;
}

namespace {

struct EmCore {
  Matrix P_occ;   // occupied-bins rows of the component matrix
  Vector h_occ;   // counts at occupied bins
  double total = 0.0;

  double objective(const Vector& q) const {
    const Vector d = P_occ * q;
    double obj = -q.sum();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d[i] <= 0.0) return -std::numeric_limits<double>::infinity();
      obj += h_occ[i] * std::log(d[i]);
    }
    return obj;
  }
};

// Newton polish of the EM fixed point on the active components. Keeps the
// objective non-decreasing; stops at machine-level stationarity.
void newton_polish(const EmCore& core, Vector& q) {
  const double total_q = q.sum();
  if (total_q <= 0.0) return;
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < q.size(); ++k)
    if (q[k] > 1e-9 * total_q) active.push_back(k);
  if (active.empty()) return;

  Matrix Pa(core.P_occ.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) Pa.col(j) = core.P_occ.col(active[j]);
  Vector qa(active.size());
  for (std::size_t j = 0; j < active.size(); ++j) qa[j] = q[active[j]];

  double obj = core.objective(q);
  for (int iter = 0; iter < 60; ++iter) {
    const Vector d0 = Pa * qa;
    if ((d0.array() <= 0.0).any()) break;
    const Vector r = (core.h_occ.array() / d0.array()).matrix();
    const Vector F = Pa.transpose() * r - Vector::Ones(qa.size());
    if (F.lpNorm<Eigen::Infinity>() < 1e-13) break;
    const Vector w = (core.h_occ.array() / d0.array().square()).matrix();
    const Matrix A = Pa.transpose() * w.asDiagonal() * Pa;
    Eigen::LDLT<Matrix> ldlt(A);
    if (ldlt.info() != Eigen::Success) break;
    Vector step = ldlt.solve(F);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      Vector cand = qa + alpha * step;
      if ((cand.array() > 0.0).all()) {
        Vector qc = Vector::Zero(q.size());
        for (Eigen::Index k = 0; k < q.size(); ++k) qc[k] = q[k];
        for (std::size_t j = 0; j < active.size(); ++j) qc[active[j]] = cand[j];
        const double cand_obj = core.objective(qc);
        if (cand_obj >= obj - 1e-12 * (1.0 + std::fabs(obj))) {
          qa = cand;
          obj = cand_obj;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  for (std::size_t j = 0; j < active.size(); ++j) q[active[j]] = qa[j];
}

}  // namespace

FitResult fit_quantities(const LpmModel& model, const ScoreHistogram& hist,
                         const std::optional<Vector>& init, const EmOptions& opts) {
  if (!(hist.spec == model.spec))
    throw std::invalid_argument("fit_quantities: histogram spec differs from model spec");
  const Matrix P = model.component_matrix();
  const int K = static_cast<int>(P.cols());

  const std::vector<Eigen::Index> occ = occupied_bins(hist.counts);
  FitResult result;
  if (occ.empty()) {
    result.estimate.q = Vector::Zero(K);
  } else {
    EmCore core;
    core.P_occ.resize(static_cast<Eigen::Index>(occ.size()), K);
    core.h_occ.resize(static_cast<Eigen::Index>(occ.size()));
    for (std::size_t i = 0; i < occ.size(); ++i) {
      core.P_occ.row(static_cast<Eigen::Index>(i)) = P.row(occ[i]);
      core.h_occ[static_cast<Eigen::Index>(i)] = hist.counts[occ[i]];
      if (P.row(occ[i]).maxCoeff() <= 0.0)
        throw std::domain_error("fit_quantities: occupied bin " + std::to_string(occ[i]) +
                                " has zero model density");
    }
    core.total = core.h_occ.sum();

    Vector q = init ? *init : Vector::Constant(K, core.total / K);
    if (q.size() != K) throw std::invalid_argument("fit_quantities: init size mismatch");
    if ((q.array() < 0.0).any())
      throw std::invalid_argument("fit_quantities: init must be non-negative");

    std::vector<double> trace;
    trace.reserve(256);
    double prev_obj = core.objective(q);
    trace.push_back(prev_obj);
    int streak = 0;
    int iter = 0;
    bool converged = false;
    for (; iter < opts.max_iterations; ++iter) {
      const Vector d = core.P_occ * q;
      Vector r(d.size());
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] <= 0.0)
          throw std::domain_error("fit_quantities: occupied bin lost model support during EM");
        r[i] = core.h_occ[i] / d[i];
      }
      q = q.cwiseProduct(core.P_occ.transpose() * r);
      const double obj = core.objective(q);
      trace.push_back(obj);
      const double rel = std::fabs(obj - prev_obj) / (1.0 + std::fabs(obj));
      prev_obj = obj;
      if (rel < opts.rel_tol) {
        if (++streak >= opts.consecutive) {
          converged = true;
          ++iter;
          break;
        }
      } else {
        streak = 0;
      }
    }
    if (!converged)
      throw FitError("fit_quantities: EM did not converge within " +
                         std::to_string(opts.max_iterations) + " iterations",
                     q, trace);
    if (opts.newton_polish) newton_polish(core, q);
    result.estimate.q = q;
    result.iterations = iter;
    result.objective = core.objective(q);
  }

  for (const auto& [b, e] : model.class_ranges())
    result.estimate.class_totals.push_back(result.estimate.q.segment(b, e - b).sum());
  return result;
}

namespace {

struct ClassTrainResult {
  Matrix components;      // full bins x K, raw (unsmoothed) PMFs
  Matrix raw_attributed;  // full bins x K
  Vector weights;         // per-component attributed totals
  std::vector<double> chi2_trace;
};

struct JointFit {
  Matrix P;        // occupied bins x K
  Matrix q;        // K x n_hists
  double objective = 0.0;
};

// Joint EM for one class: shared component PMFs, per-histogram quantities.
JointFit joint_em(const std::vector<Vector>& hists_occ, const Vector& pooled_occ, int ncomp,
                  Rng& rng, const EmOptions& em) {
  const Eigen::Index m = pooled_occ.size();
  const int nh = static_cast<int>(hists_occ.size());
  JointFit fit;
  fit.P.resize(m, ncomp);
  const Vector pooled_norm = pooled_occ / pooled_occ.sum();
  for (int k = 0; k < ncomp; ++k) {
    Vector col(m);
    for (Eigen::Index x = 0; x < m; ++x)
      col[x] = pooled_norm[x] * (1.0 + 0.35 * (2.0 * rng.uniform() - 1.0));
    fit.P.col(k) = col / col.sum();
  }
  fit.q.resize(ncomp, nh);
  for (int h = 0; h < nh; ++h) fit.q.col(h).setConstant(hists_occ[h].sum() / ncomp);

  double prev_obj = -std::numeric_limits<double>::infinity();
  int streak = 0;
  for (int iter = 0; iter < em.max_iterations; ++iter) {
    Matrix numer = Matrix::Zero(m, ncomp);
    double obj = 0.0;
    for (int h = 0; h < nh; ++h) {
      const Vector d = fit.P * fit.q.col(h);
      Vector ratio(m);
      for (Eigen::Index x = 0; x < m; ++x) {
        const double hx = hists_occ[h][x];
        if (hx > 0.0) {
          const double dx = std::max(d[x], 1e-300);
          ratio[x] = hx / dx;
          obj += hx * std::log(dx);
        } else {
          ratio[x] = 0.0;
        }
      }
      obj -= fit.q.col(h).sum();
      const Vector scale = fit.P.transpose() * ratio;  // per-component
      // numer(x,k) += P(x,k) q_k ratio_x accumulated over histograms
      numer += (fit.P.array().colwise() * ratio.array()).matrix() *
               fit.q.col(h).asDiagonal();
      fit.q.col(h) = fit.q.col(h).cwiseProduct(scale);
    }
    for (int k = 0; k < ncomp; ++k) {
      const double s = numer.col(k).sum();
      if (s > 0.0) fit.P.col(k) = numer.col(k) / s;
    }
    const double rel = std::fabs(obj - prev_obj) / (1.0 + std::fabs(obj));
    prev_obj = obj;
    if (rel < em.rel_tol) {
      if (++streak >= em.consecutive) break;
    } else {
      streak = 0;
    }
  }
  fit.objective = prev_obj;
  return fit;
}

double chi2_per_dof_of_fit(const JointFit& fit, const std::vector<Vector>& hists_occ,
                           int* dof_out) {
  const Eigen::Index m = fit.P.rows();
  const int nh = static_cast<int>(hists_occ.size());
  const int ncomp = static_cast<int>(fit.P.cols());
  double chi2 = 0.0;
  for (int h = 0; h < nh; ++h) {
    const Vector mu = fit.P * fit.q.col(h);
    for (Eigen::Index x = 0; x < m; ++x) {
      const double v = std::max(mu[x], 1e-12);
      const double rsd = hists_occ[h][x] - mu[x];
      chi2 += rsd * rsd / v;
    }
  }
  const int dof = static_cast<int>(m) * nh - ncomp * (static_cast<int>(m) - 1) - ncomp * nh;
  if (dof_out) *dof_out = dof;
  if (dof < 1) return 0.0;
  return chi2 / dof;
}

ClassTrainResult train_class(const std::vector<ScoreHistogram>& hists, Eigen::Index full_bins,
                             std::uint64_t class_seed, const TrainOptions& opts) {
  Vector pooled_full = Vector::Zero(full_bins);
  for (const ScoreHistogram& h : hists) pooled_full += h.counts;
  const std::vector<Eigen::Index> occ = occupied_bins(pooled_full);
  if (occ.empty()) throw std::invalid_argument("train: class has no occupied bins");

  const Eigen::Index m = static_cast<Eigen::Index>(occ.size());
  std::vector<Vector> hists_occ;
  for (const ScoreHistogram& h : hists) {
    Vector v(m);
    for (Eigen::Index i = 0; i < m; ++i) v[i] = h.counts[occ[static_cast<std::size_t>(i)]];
    hists_occ.push_back(std::move(v));
  }
  Vector pooled_occ(m);
  for (Eigen::Index i = 0; i < m; ++i)
    pooled_occ[i] = pooled_full[occ[static_cast<std::size_t>(i)]];

  const int comp_cap = std::max(1, std::min<int>(opts.max_components, static_cast<int>(m)));
  ClassTrainResult result;
  JointFit best_fit;
  for (int ncomp = 1; ncomp <= comp_cap; ++ncomp) {
    JointFit best;
    best.objective = -std::numeric_limits<double>::infinity();
    const int restarts = std::max(1, ncomp == 1 ? 1 : opts.restarts);
    for (int r = 0; r < restarts; ++r) {
      Rng rng(derive_seed(class_seed, static_cast<std::uint64_t>(ncomp),
                          static_cast<std::uint64_t>(r)));
      JointFit fit = joint_em(hists_occ, pooled_occ, ncomp, rng, opts.em);
      if (fit.objective > best.objective) best = std::move(fit);
    }
    int dof = 0;
    const double chi2 = chi2_per_dof_of_fit(best, hists_occ, &dof);
    result.chi2_trace.push_back(chi2);
    best_fit = std::move(best);
    if (dof < 1 || chi2 <= opts.chi2_target) break;
  }

  const int ncomp = static_cast<int>(best_fit.P.cols());
  const int nh = static_cast<int>(hists_occ.size());

  // Attribute training counts to components via the converged responsibilities.
  Matrix attributed_occ = Matrix::Zero(m, ncomp);
  for (int h = 0; h < nh; ++h) {
    const Vector d = best_fit.P * best_fit.q.col(h);
    for (Eigen::Index x = 0; x < m; ++x) {
      const double hx = hists_occ[h][x];
      if (hx <= 0.0 || d[x] <= 0.0) continue;
      for (int k = 0; k < ncomp; ++k)
        attributed_occ(x, k) += hx * best_fit.P(x, k) * best_fit.q(k, h) / d[x];
    }
  }

  result.components = Matrix::Zero(full_bins, ncomp);
  result.raw_attributed = Matrix::Zero(full_bins, ncomp);
  result.weights = Vector::Zero(ncomp);
  for (int k = 0; k < ncomp; ++k) {
    const double nk = attributed_occ.col(k).sum();
    result.weights[k] = nk;
    for (Eigen::Index i = 0; i < m; ++i) {
      result.raw_attributed(occ[static_cast<std::size_t>(i)], k) = attributed_occ(i, k);
      if (nk > 0.0)
        result.components(occ[static_cast<std::size_t>(i)], k) = attributed_occ(i, k) / nk;
    }
  }
  return result;
}

}  // namespace

LpmModel train(const std::vector<ScoreHistogram>& true_hists,
               const std::vector<ScoreHistogram>& false_hists, const TrainOptions& opts) {
  if (true_hists.empty() || false_hists.empty())
    throw std::invalid_argument("train: need at least one histogram per class");
  const HistogramSpec& spec = true_hists[0].spec;
  for (const auto* set : {&true_hists, &false_hists})
    for (const ScoreHistogram& h : *set)
      if (!(h.spec == spec)) throw std::invalid_argument("train: histograms must share a spec");

  LpmModel model;
  model.spec = spec;
  model.training_histograms = {true_hists, false_hists};
  model.meta.seed = opts.seed;
  model.meta.restarts = opts.restarts;

  const Eigen::Index bins = spec.total_bins();
  const char* names[2] = {"true", "false"};
  for (int cls = 0; cls < 2; ++cls) {
    const auto& hists = cls == 0 ? true_hists : false_hists;
    ClassTrainResult r =
        train_class(hists, bins, derive_seed(opts.seed, static_cast<std::uint64_t>(cls)), opts);

    ClassModel cm;
    cm.name = names[cls];
    const int ncomp = static_cast<int>(r.components.cols());
    cm.raw_attributed = r.raw_attributed;
    cm.training_weights = r.weights;
    cm.pseudocount = Vector::Zero(ncomp);
    cm.components = Matrix::Zero(bins, ncomp);
    for (int k = 0; k < ncomp; ++k) {
      // Uniform pseudocount keeps every in-range bin representable at fit
      // time and bounds the leverage of training-empty bins in C_model.
      const double alpha = opts.pseudocount_mass * r.weights[k] / static_cast<double>(bins);
      cm.pseudocount[k] = alpha;
      const double denom = r.weights[k] + alpha * static_cast<double>(bins);
      if (denom > 0.0)
        cm.components.col(k) =
            (r.raw_attributed.col(k).array() + alpha).matrix() / denom;
      else
        cm.components.col(k).setConstant(1.0 / static_cast<double>(bins));
    }
    model.classes.push_back(std::move(cm));
    model.meta.chi2_trace.push_back(r.chi2_trace);
  }
  return model;
}

Matrix quantity_bin_jacobian(const LpmModel& model, const ScoreHistogram& hist,
                             const Vector& q_fit, std::vector<Eigen::Index>& occupied) {
  const Matrix P = model.component_matrix();
  const int K = static_cast<int>(P.cols());
  occupied = occupied_bins(hist.counts);
  Matrix J = Matrix::Zero(K, static_cast<Eigen::Index>(occupied.size()));
  if (occupied.empty()) return J;

  const double total_q = q_fit.sum();
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < K; ++k)
    if (q_fit[k] > 1e-12 * std::max(1.0, total_q)) active.push_back(k);
  if (active.empty()) return J;

  Matrix Pa(static_cast<Eigen::Index>(occupied.size()), static_cast<Eigen::Index>(active.size()));
  Vector h(static_cast<Eigen::Index>(occupied.size()));
  Vector qa(static_cast<Eigen::Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) qa[static_cast<Eigen::Index>(j)] = q_fit[active[j]];
  for (std::size_t i = 0; i < occupied.size(); ++i) {
    h[static_cast<Eigen::Index>(i)] = hist.counts[occupied[i]];
    for (std::size_t j = 0; j < active.size(); ++j)
      Pa(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = P(occupied[i], active[j]);
  }
  const Vector d = Pa * qa;
  const Vector w = (h.array() / d.array().square()).matrix();
  const Matrix A = Pa.transpose() * w.asDiagonal() * Pa;
  Eigen::LDLT<Matrix> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("quantity_bin_jacobian: singular curvature at fit point");

  for (std::size_t i = 0; i < occupied.size(); ++i) {
    const Vector r = Pa.row(static_cast<Eigen::Index>(i)).transpose() /
                     d[static_cast<Eigen::Index>(i)];
    const Vector z = ldlt.solve(r);
    for (std::size_t j = 0; j < active.size(); ++j)
      J(active[j], static_cast<Eigen::Index>(i)) = z[static_cast<Eigen::Index>(j)];
  }
  return J;
}

QuantityEstimate propagate_errors(const LpmModel& model, const ScoreHistogram& hist,
                                  const Vector& q_fit) {
  if (!(hist.spec == model.spec))
    throw std::invalid_argument("propagate_errors: histogram spec differs from model spec");
  const Matrix P = model.component_matrix();
  const int K = static_cast<int>(P.cols());
  if (q_fit.size() != K) throw std::invalid_argument("propagate_errors: q size mismatch");

  QuantityEstimate est;
  est.q = q_fit;
  const auto ranges = model.class_ranges();
  for (const auto& [b, e] : ranges) est.class_totals.push_back(q_fit.segment(b, e - b).sum());
  est.covariance = Matrix::Zero(K, K);
  est.class_covariance = Matrix::Zero(static_cast<Eigen::Index>(ranges.size()),
                                      static_cast<Eigen::Index>(ranges.size()));

  const std::vector<Eigen::Index> occ = occupied_bins(hist.counts);
  const double total_q = q_fit.sum();
  if (occ.empty() || total_q <= 0.0) return est;

  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < K; ++k)
    if (q_fit[k] > 1e-12 * std::max(1.0, total_q)) active.push_back(k);
  if (active.empty()) return est;
  const Eigen::Index Ka = static_cast<Eigen::Index>(active.size());
  const Eigen::Index m = static_cast<Eigen::Index>(occ.size());

  Matrix Pa(m, Ka);
  Vector h(m), qa(Ka);
  for (Eigen::Index j = 0; j < Ka; ++j) qa[j] = q_fit[active[static_cast<std::size_t>(j)]];
  for (Eigen::Index i = 0; i < m; ++i) {
    h[i] = hist.counts[occ[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < Ka; ++j)
      Pa(i, j) = P(occ[static_cast<std::size_t>(i)], active[static_cast<std::size_t>(j)]);
  }
  const Vector d = Pa * qa;
  for (Eigen::Index i = 0; i < m; ++i)
    if (d[i] <= 0.0)
      throw std::domain_error("propagate_errors: occupied bin with zero model density");

  const Vector w = (h.array() / d.array().square()).matrix();
  const Matrix A = Pa.transpose() * w.asDiagonal() * Pa;
  Eigen::LDLT<Matrix> ldlt(A);
  {
    const Vector diag = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || diag.minCoeff() <= 1e-14 * diag.maxCoeff())
      throw std::runtime_error(
          "propagate_errors: singular curvature at fit point; reduce model components");
  }

  // C_data = sum_X (dq/dH_X)(dq/dH_X)^T H_X with dq/dH_X = A^-1 P(X|.)/D_X.
  Matrix c_data = Matrix::Zero(Ka, Ka);
  Matrix z_data(Ka, m);  // dq/dH_X per occupied bin, reused in C_model terms
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vector r = Pa.row(i).transpose() / d[i];
    const Vector z = ldlt.solve(r);
    z_data.col(i) = z;
    c_data += h[i] * z * z.transpose();
  }

  // C_model: sensitivity to Poisson noise in the training bins attributed to
  // each component, propagated through the component PMFs.
  Matrix c_model = Matrix::Zero(Ka, Ka);
  for (Eigen::Index j = 0; j < Ka; ++j) {
    const Eigen::Index k = active[static_cast<std::size_t>(j)];
    // Locate the owning class and in-class column of component k.
    int cls = 0, col = static_cast<int>(k);
    while (col >= model.classes[static_cast<std::size_t>(cls)].component_count()) {
      col -= model.classes[static_cast<std::size_t>(cls)].component_count();
      ++cls;
    }
    const ClassModel& cm = model.classes[static_cast<std::size_t>(cls)];
    const double nk_s = cm.smoothed_total(col);
    if (nk_s <= 0.0) continue;

    // z_{Y} = A^-1 dF/dP(Y|k) for occupied Y; zero elsewhere.
    Matrix zs(Ka, m);
    Vector sbar = Vector::Zero(Ka);
    for (Eigen::Index i = 0; i < m; ++i) {
      Vector g = -(h[i] * qa[j] / (d[i] * d[i])) * Pa.row(i).transpose();
      g[j] += h[i] / d[i];
      const Vector z = ldlt.solve(g);
      zs.col(i) = z;
      sbar += P(occ[static_cast<std::size_t>(i)], k) * z;
    }

    double raw_total = cm.training_weights[col];
    double raw_on_occ = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double c = cm.raw_attributed(occ[static_cast<std::size_t>(i)], col);
      if (c <= 0.0) continue;
      raw_on_occ += c;
      const Vector v = zs.col(i) - sbar;
      c_model += (c / (nk_s * nk_s)) * v * v.transpose();
    }
    const double raw_rest = std::max(0.0, raw_total - raw_on_occ);
    if (raw_rest > 0.0) c_model += (raw_rest / (nk_s * nk_s)) * sbar * sbar.transpose();
  }

  Matrix cov_active = c_data + c_model;
  cov_active = 0.5 * (cov_active + cov_active.transpose()).eval();
  for (Eigen::Index a = 0; a < Ka; ++a)
    for (Eigen::Index b = 0; b < Ka; ++b)
      est.covariance(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]) =
          cov_active(a, b);

  for (std::size_t ca = 0; ca < ranges.size(); ++ca)
    for (std::size_t cb = 0; cb < ranges.size(); ++cb)
      est.class_covariance(static_cast<Eigen::Index>(ca), static_cast<Eigen::Index>(cb)) =
          est.covariance
              .block(ranges[ca].first, ranges[cb].first, ranges[ca].second - ranges[ca].first,
                     ranges[cb].second - ranges[cb].first)
              .sum();
  return est;
}

}  // namespace crater::lpm
