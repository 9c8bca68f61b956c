#pragma once

// Trainable models: tangent-space RGC with a linear SVM, and the CSP + LDA
// baseline.

#include "rgc/covariance.hpp"
#include "rgc/spd.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace rgc {

/// D(f) = w^T f + b; sign(D) is the class, with D == 0 mapped to +1.
struct LinearDecisionFunction {
  Eigen::VectorXd weights;
  double bias = 0.0;

  double value(const Eigen::VectorXd& f) const { return weights.dot(f) + bias; }
  Label classify(const Eigen::VectorXd& f) const {
    return value(f) >= 0.0 ? Label::Positive : Label::Negative;
  }
};

// ---------------------------------------------------------------------------
// Linear SVM

struct SvmOptions {
  /// Stop once (primal - dual) <= gap_tolerance * max(1, |primal|).
  double gap_tolerance = 1e-6;
  /// One epoch is n pair updates.
  long max_epochs = 100000;
  /// Memory budget for cached kernel rows.
  std::size_t cache_bytes = std::size_t{256} << 20;
};

struct SvmResult {
  LinearDecisionFunction decision;
  /// Dual variables, one per example, in [0, c].
  Eigen::VectorXd alphas;
  double primal = 0.0;
  double dual = 0.0;
  double duality_gap = 0.0;
  long iterations = 0;
  bool converged = false;
  /// Set when the solution has (numerically) zero weight vector.
  bool low_confidence = false;
};

/// Soft-margin linear SVM with unregularized bias:
///   min 1/2 ||w||^2 + c sum_k max(0, 1 - y_k (w^T f_k + b)).
/// Solved in the dual by SMO with second-order working-set selection; the bias
/// is the exact primal minimizer for the final w. `features` holds one
/// example per column.
SvmResult train_linear_svm(const Eigen::MatrixXd& features, std::span<const Label> labels,
                           double c, const SvmOptions& options = {});

/// Primal objective for (w, b); used for reporting and by tests.
double svm_primal_objective(const Eigen::MatrixXd& features, std::span<const Label> labels,
                            double c, const LinearDecisionFunction& d);

// ---------------------------------------------------------------------------
// LDA

struct LdaResult {
  LinearDecisionFunction decision;
  /// Ledoit-Wolf intensity used on the pooled within-class covariance.
  double shrinkage = 0.0;
  bool low_confidence = false;
};

/// w = Sigma^-1 (mu+ - mu-), b = -w^T (mu+ + mu-) / 2, where Sigma is the
/// Ledoit-Wolf shrunk covariance of the class-centered feature vectors.
LdaResult train_lda(const Eigen::MatrixXd& features, std::span<const Label> labels);

// ---------------------------------------------------------------------------
// CSP

struct CspFilters {
  /// C x n_filters; columns ordered by descending generalized eigenvalue and
  /// scaled so that w^T (R+ + R-) w = 1.
  Eigen::MatrixXd filters;
  Eigen::VectorXd eigenvalues;
};

/// Generalized eigenvectors of (R+, R+ + R-); keeps n_filters/2 from each end
/// of the spectrum.
CspFilters csp_filters(const SpdMatrix& positive, const SpdMatrix& negative, int n_filters);

struct CspModel {
  Eigen::MatrixXd filters;
  Eigen::VectorXd eigenvalues;
  LinearDecisionFunction lda;

  Eigen::Index channels() const { return filters.rows(); }
};

struct CspFeatures {
  Eigen::VectorXd values;
  /// True when at least one output variance was clamped to kCspVarianceFloor.
  bool clamped = false;
};

inline constexpr double kCspVarianceFloor = 1e-20;

/// ln(var(w_i^T X)) per filter, variance over the window's samples
/// (mean removed, 1/(T-1) normalization).
CspFeatures csp_features(const Eigen::MatrixXd& filters, const EegSegment& x);

/// Class covariances are the mean per-segment shrinkage covariances of
/// `filter_set`; the LDA is trained on features of `feature_set`.
CspModel train_csp(std::span<const EegSegment> filter_set, std::span<const EegSegment> feature_set,
                   int n_filters = 6);
inline CspModel train_csp(std::span<const EegSegment> train, int n_filters = 6) {
  return train_csp(train, train, n_filters);
}

double csp_decision_value(const CspModel& model, const EegSegment& x);
Label classify_csp(const CspModel& model, const EegSegment& x);

// ---------------------------------------------------------------------------
// Riemannian geometry classifier

enum class MeanEstimator { LogEuclidean, Iterative };

struct RgcOptions {
  double svm_c = 1.0;
  MeanEstimator mean = MeanEstimator::LogEuclidean;
  SvmOptions svm;
};

struct RgcModel {
  SpdMatrix reference_mean;
  LinearDecisionFunction svm;
  Eigen::Index feature_dim = 0;

  Eigen::Index channels() const { return reference_mean.dim(); }
};

/// Trains from already estimated covariances (pooled over both classes for
/// the reference mean).
RgcModel train_rgc(std::span<const SpdMatrix> covariances, std::span<const Label> labels,
                   const RgcOptions& options = {});

/// Shrinkage covariance per segment, then as above.
RgcModel train_rgc(std::span<const EegSegment> train, const RgcOptions& options = {});

/// Tangent features of a batch of covariances at the model's reference, one
/// column per input.
Eigen::MatrixXd rgc_features(const SpdMatrix& reference, std::span<const SpdMatrix> covariances);

double rgc_decision_value(const RgcModel& model, const SpdMatrix& covariance);
double rgc_decision_value(const RgcModel& model, const EegSegment& x);
Label classify_rgc(const RgcModel& model, const EegSegment& x);

/// Inner k-fold grid search for the SVM cost. Folds are formed over distinct
/// `groups` (segment ids) so sibling windows never straddle a split; ties
/// go to the smaller c.
double select_svm_c(std::span<const SpdMatrix> covariances, std::span<const Label> labels,
                    std::span<const std::size_t> groups, std::span<const double> grid,
                    int folds = 5, MeanEstimator mean = MeanEstimator::LogEuclidean);

}  // namespace rgc
