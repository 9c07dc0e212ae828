#pragma once

#include "crater/scores.hpp"
#include "crater/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crater::lpm {

/// One class of a linear Poisson model: a set of PMF components over the
/// histogram bins plus the training data attributed to each component.
struct ClassModel {
  std::string name;          // "true" or "false"
  Matrix components;         // bins x n_components; columns sum to 1, > 0 in range
  Vector training_weights;   // raw training counts attributed per component
  Matrix raw_attributed;     // bins x n_components raw attributed training counts
  Vector pseudocount;        // per-component pseudocount added to every bin

  int component_count() const { return static_cast<int>(components.cols()); }
  /// Effective training total per component after smoothing.
  double smoothed_total(int k) const {
    return training_weights[k] + pseudocount[k] * static_cast<double>(components.rows());
  }
};

struct TrainingMetadata {
  std::uint64_t seed = 0;
  int restarts = 0;
  std::vector<std::vector<double>> chi2_trace;  // per class, chi2/dof per component count
};

struct LpmModel {
  HistogramSpec spec;
  std::vector<ClassModel> classes;
  std::vector<std::vector<ScoreHistogram>> training_histograms;  // per class
  TrainingMetadata meta;

  int total_components() const;
  /// All class components stacked into one bins x K matrix (class-major order).
  Matrix component_matrix() const;
  /// Half-open component index range [begin, end) of each class.
  std::vector<std::pair<int, int>> class_ranges() const;
};

/// Fitted quantities with optional covariance blocks.
struct QuantityEstimate {
  Vector q;                          // per-component quantities, >= 0
  std::vector<double> class_totals;  // per-class sums of q
  Matrix covariance;                 // K x K; empty until errors are propagated
  Matrix class_covariance;           // n_classes x n_classes; empty until propagated
};

struct EmOptions {
  double rel_tol = 1e-10;   ///< relative objective change counted as converged
  int consecutive = 3;      ///< required consecutive converged iterations
  int max_iterations = 10000;
  bool newton_polish = true;  ///< polish the EM fixed point with Newton steps
};

struct TrainOptions {
  double chi2_target = 1.2;
  int max_components = 10;
  int restarts = 5;
  std::uint64_t seed = 0;
  /// Fraction of each class's training mass spread uniformly over bins so
  /// every in-range bin keeps non-zero probability at fit time.
  double pseudocount_mass = 0.003;
  EmOptions em{.rel_tol = 1e-9, .consecutive = 3, .max_iterations = 4000,
               .newton_polish = false};
};

/// Thrown when EM fails to converge; carries the last iterate and the
/// objective trace for diagnosis.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, Vector last_q, std::vector<double> trace)
      : std::runtime_error(what), last_q(std::move(last_q)), objective_trace(std::move(trace)) {}
  Vector last_q;
  std::vector<double> objective_trace;
};

/// Extended maximum likelihood objective
///   ln L = sum_X ln[sum_k P(X|k) q_k] H_X - sum_k q_k.
/// Throws std::domain_error naming the bins if some occupied bin has zero
/// model density.
double eml_log_likelihood(const Matrix& components, const Vector& q, const ScoreHistogram& hist);

struct FitResult {
  QuantityEstimate estimate;
  int iterations = 0;
  double objective = 0.0;
};

/// Fits component quantities to a histogram by multiplicative EM updates
/// (optionally Newton-polished at the end). The EML objective is
/// non-decreasing across EM iterations.
FitResult fit_quantities(const LpmModel& model, const ScoreHistogram& hist,
                         const std::optional<Vector>& init = std::nullopt,
                         const EmOptions& opts = {});

/// Trains per-class components by joint EM over example histograms, growing
/// the component count until chi2 per degree of freedom reaches the target.
LpmModel train(const std::vector<ScoreHistogram>& true_hists,
               const std::vector<ScoreHistogram>& false_hists, const TrainOptions& opts = {});

/// Propagates Poisson bin errors of the fitted histogram (C_data) and of the
/// training histograms (C_model) through the fit, filling the covariance and
/// the per-class covariance of the estimate. q_fit must be a converged fit.
QuantityEstimate propagate_errors(const LpmModel& model, const ScoreHistogram& hist,
                                  const Vector& q_fit);

/// Sensitivities dq/dH_X of the fitted quantities to each occupied bin of the
/// fitted histogram (columns align with `occupied`); used by propagate_errors
/// and exposed for finite-difference validation.
Matrix quantity_bin_jacobian(const LpmModel& model, const ScoreHistogram& hist,
                             const Vector& q_fit, std::vector<Eigen::Index>& occupied);

}  // namespace crater::lpm
