#include "rgc/classifiers.hpp"

#include "rgc/error.hpp"

#include <cmath>
#include <sstream>

namespace rgc {

namespace {

void require_both_classes(std::span<const Label> labels, const char* what) {
  bool pos = false;
  bool neg = false;
  for (const auto l : labels) {
    pos |= l == Label::Positive;
    neg |= l == Label::Negative;
    if (l == Label::Unlabeled) throw InvalidInput(std::string(what) + ": unlabeled example");
  }
  if (!pos || !neg) throw InvalidInput(std::string(what) + ": both classes are required");
}

std::vector<Label> labels_of(std::span<const EegSegment> set) {
  std::vector<Label> out;
  out.reserve(set.size());
  for (const auto& s : set) out.push_back(s.label);
  return out;
}

}  // namespace

LdaResult train_lda(const Eigen::MatrixXd& features, std::span<const Label> labels) {
  if (static_cast<std::size_t>(features.cols()) != labels.size()) {
    throw InvalidInput("LDA: feature/label count mismatch");
  }
  require_both_classes(labels, "LDA");
  const Eigen::Index dim = features.rows();
  const Eigen::Index n = features.cols();

  Eigen::VectorXd mu_pos = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd mu_neg = Eigen::VectorXd::Zero(dim);
  double n_pos = 0;
  double n_neg = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (labels[static_cast<std::size_t>(k)] == Label::Positive) {
      mu_pos += features.col(k);
      n_pos += 1;
    } else {
      mu_neg += features.col(k);
      n_neg += 1;
    }
  }
  mu_pos /= n_pos;
  mu_neg /= n_neg;

  Eigen::MatrixXd centered(dim, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const bool pos = labels[static_cast<std::size_t>(k)] == Label::Positive;
    centered.col(k) = features.col(k) - (pos ? mu_pos : mu_neg);
  }

  LdaResult result;
  const Eigen::VectorXd diff = mu_pos - mu_neg;
  Eigen::VectorXd w;
  if (n >= 2) {
    const ShrinkageResult pooled = shrinkage_covariance(centered);
    result.shrinkage = pooled.intensity;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(pooled.covariance.matrix());
    const double spread = pooled.covariance.matrix().trace();
    if (ldlt.info() == Eigen::Success && spread > 0.0 && ldlt.isPositive() &&
        ldlt.vectorD().minCoeff() > 0.0) {
      w = ldlt.solve(diff);
    }
    result.low_confidence = diff.norm() <= 1e-10 * (1.0 + std::sqrt(std::max(0.0, spread)));
  }
  if (w.size() == 0 || !w.allFinite()) {
    // Zero within-class scatter: fall back to the mean difference direction.
    w = diff;
    result.low_confidence = true;
  }
  result.decision = LinearDecisionFunction{w, -0.5 * w.dot(mu_pos + mu_neg)};
  return result;
}

CspFilters csp_filters(const SpdMatrix& positive, const SpdMatrix& negative, int n_filters) {
  const Eigen::Index c = positive.dim();
  if (negative.dim() != c) throw InvalidInput("CSP: class covariance dimensions differ");
  if (n_filters < 2 || n_filters % 2 != 0 || n_filters > c) {
    std::ostringstream os;
    os << "CSP: n_filters must be even and in [2, " << c << "], got " << n_filters;
    throw InvalidInput(os.str());
  }
  const Eigen::MatrixXd composite = positive.matrix() + negative.matrix();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      positive.matrix(), composite, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("CSP: generalized eigensolver failed");
  }
  // Ascending eigenvalues; eigenvectors are normalized to v^T B v = 1.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  const int half = n_filters / 2;

  CspFilters out;
  out.filters.resize(c, n_filters);
  out.eigenvalues.resize(n_filters);
  for (int k = 0; k < half; ++k) {
    const Eigen::Index top = c - 1 - k;
    out.filters.col(k) = vectors.col(top);
    out.eigenvalues(k) = values(top);
  }
  for (int k = 0; k < half; ++k) {
    const Eigen::Index bottom = half - 1 - k;
    out.filters.col(half + k) = vectors.col(bottom);
    out.eigenvalues(half + k) = values(bottom);
  }
  return out;
}

CspFeatures csp_features(const Eigen::MatrixXd& filters, const EegSegment& x) {
  if (x.channels() != filters.rows()) {
    std::ostringstream os;
    os << "CSP: model expects " << filters.rows() << " channels, segment has " << x.channels();
    throw InvalidInput(os.str());
  }
  if (x.samples() < 2) throw InvalidInput("CSP: window needs at least 2 samples");
  Eigen::MatrixXd projected = filters.transpose() * x.data;
  projected.colwise() -= projected.rowwise().mean();
  const Eigen::VectorXd variance =
      projected.rowwise().squaredNorm() / static_cast<double>(x.samples() - 1);

  CspFeatures out;
  out.values.resize(variance.size());
  for (Eigen::Index i = 0; i < variance.size(); ++i) {
    double v = variance(i);
    if (!(v > kCspVarianceFloor)) {
      v = kCspVarianceFloor;
      out.clamped = true;
    }
    out.values(i) = std::log(v);
  }
  return out;
}

CspModel train_csp(std::span<const EegSegment> filter_set, std::span<const EegSegment> feature_set,
                   int n_filters) {
  if (filter_set.empty() || feature_set.empty()) throw InvalidInput("CSP: empty training set");
  require_both_classes(labels_of(filter_set), "CSP");
  const auto feature_labels = labels_of(feature_set);
  require_both_classes(feature_labels, "CSP");

  const Eigen::Index c = filter_set.front().channels();
  Eigen::MatrixXd sum_pos = Eigen::MatrixXd::Zero(c, c);
  Eigen::MatrixXd sum_neg = Eigen::MatrixXd::Zero(c, c);
  double n_pos = 0;
  double n_neg = 0;
  for (const auto& s : filter_set) {
    if (s.channels() != c) throw InvalidInput("CSP: inconsistent channel counts");
    const auto cov = shrinkage_covariance(s).covariance.matrix();
    if (s.label == Label::Positive) {
      sum_pos += cov;
      n_pos += 1;
    } else {
      sum_neg += cov;
      n_neg += 1;
    }
  }
  const CspFilters f =
      csp_filters(SpdMatrix(sum_pos / n_pos), SpdMatrix(sum_neg / n_neg), n_filters);

  Eigen::MatrixXd features(n_filters, static_cast<Eigen::Index>(feature_set.size()));
  for (std::size_t k = 0; k < feature_set.size(); ++k) {
    features.col(static_cast<Eigen::Index>(k)) = csp_features(f.filters, feature_set[k]).values;
  }
  return CspModel{f.filters, f.eigenvalues, train_lda(features, feature_labels).decision};
}

double csp_decision_value(const CspModel& model, const EegSegment& x) {
  return model.lda.value(csp_features(model.filters, x).values);
}

Label classify_csp(const CspModel& model, const EegSegment& x) {
  return csp_decision_value(model, x) >= 0.0 ? Label::Positive : Label::Negative;
}

}  // namespace rgc
