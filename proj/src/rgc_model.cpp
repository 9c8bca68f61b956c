#include "rgc/classifiers.hpp"

#include "rgc/error.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace rgc {

namespace {

SpdMatrix reference_mean(std::span<const SpdMatrix> covariances, MeanEstimator estimator) {
  if (estimator == MeanEstimator::Iterative) return riemannian_mean_iterative(covariances).mean;
  return log_euclidean_mean(covariances);
}

}  // namespace

Eigen::MatrixXd rgc_features(const SpdMatrix& reference, std::span<const SpdMatrix> covariances) {
  const TangentSpace space(reference);
  Eigen::MatrixXd out(half_vector_length(reference.dim()),
                      static_cast<Eigen::Index>(covariances.size()));
  for (std::size_t k = 0; k < covariances.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = space.features(covariances[k]);
  }
  return out;
}

RgcModel train_rgc(std::span<const SpdMatrix> covariances, std::span<const Label> labels,
                   const RgcOptions& options) {
  if (covariances.size() != labels.size()) throw InvalidInput("RGC: covariance/label mismatch");
  if (covariances.empty()) throw InvalidInput("RGC: empty training set");
  const bool pos = std::find(labels.begin(), labels.end(), Label::Positive) != labels.end();
  const bool neg = std::find(labels.begin(), labels.end(), Label::Negative) != labels.end();
  if (!pos || !neg) throw InvalidInput("RGC: training set must contain both classes");

  SpdMatrix mean = reference_mean(covariances, options.mean);
  const Eigen::MatrixXd features = rgc_features(mean, covariances);
  SvmResult svm = train_linear_svm(features, labels, options.svm_c, options.svm);
  return RgcModel{std::move(mean), std::move(svm.decision), features.rows()};
}

RgcModel train_rgc(std::span<const EegSegment> train, const RgcOptions& options) {
  if (train.empty()) throw InvalidInput("RGC: empty training set");
  const Eigen::Index c = train.front().channels();
  std::vector<SpdMatrix> covariances;
  std::vector<Label> labels;
  covariances.reserve(train.size());
  labels.reserve(train.size());
  for (const auto& s : train) {
    if (s.channels() != c) throw InvalidInput("RGC: inconsistent channel counts");
    covariances.push_back(shrinkage_covariance(s).covariance);
    labels.push_back(s.label);
  }
  return train_rgc(covariances, labels, options);
}

double rgc_decision_value(const RgcModel& model, const SpdMatrix& covariance) {
  if (covariance.dim() != model.channels()) {
    std::ostringstream os;
    os << "RGC: model expects " << model.channels() << " channels, got " << covariance.dim();
    throw InvalidInput(os.str());
  }
  return model.svm.value(half_vectorize(tangent_map(model.reference_mean, covariance)));
}

double rgc_decision_value(const RgcModel& model, const EegSegment& x) {
  if (x.channels() != model.channels()) {
    std::ostringstream os;
    os << "RGC: model expects " << model.channels() << " channels, segment has "
       << x.channels();
    throw InvalidInput(os.str());
  }
  return rgc_decision_value(model, shrinkage_covariance(x).covariance);
}

Label classify_rgc(const RgcModel& model, const EegSegment& x) {
  return rgc_decision_value(model, x) >= 0.0 ? Label::Positive : Label::Negative;
}

double select_svm_c(std::span<const SpdMatrix> covariances, std::span<const Label> labels,
                    std::span<const std::size_t> groups, std::span<const double> grid, int folds,
                    MeanEstimator mean) {
  if (grid.empty()) throw InvalidInput("SVM grid is empty");
  if (folds < 2) throw InvalidInput("inner cross-validation needs at least 2 folds");
  if (covariances.size() != labels.size() || labels.size() != groups.size()) {
    throw InvalidInput("select_svm_c: input length mismatch");
  }
  std::map<std::size_t, int> fold_of;
  for (const auto g : groups) fold_of.emplace(g, 0);
  int next = 0;
  for (auto& [group, fold] : fold_of) fold = next++ % folds;

  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  double best_c = sorted.front();
  double best_acc = -1.0;
  for (const double c : sorted) {
    long correct = 0;
    long total = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<SpdMatrix> train_cov;
      std::vector<Label> train_lab;
      std::vector<std::size_t> test_idx;
      for (std::size_t k = 0; k < labels.size(); ++k) {
        if (fold_of[groups[k]] == f) {
          test_idx.push_back(k);
        } else {
          train_cov.push_back(covariances[k]);
          train_lab.push_back(labels[k]);
        }
      }
      const bool pos = std::count(train_lab.begin(), train_lab.end(), Label::Positive) > 0;
      const bool neg = std::count(train_lab.begin(), train_lab.end(), Label::Negative) > 0;
      if (test_idx.empty() || !pos || !neg) continue;
      RgcOptions options;
      options.svm_c = c;
      options.mean = mean;
      const RgcModel model = train_rgc(train_cov, train_lab, options);
      const TangentSpace space(model.reference_mean);
      for (const auto k : test_idx) {
        const Label predicted = model.svm.classify(space.features(covariances[k]));
        correct += predicted == labels[k];
        ++total;
      }
    }
    const double acc = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    if (acc > best_acc) {
      best_acc = acc;
      best_c = c;
    }
  }
  return best_c;
}

}  // namespace rgc
