#include "rgc/evaluation.hpp"

#include "rgc/error.hpp"
#include "rgc/sigproc.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <random>
#include <sstream>

namespace rgc {

std::string to_string(Method m) { return m == Method::Rgc ? "RGC" : "CSP"; }

Method parse_method(const std::string& s) {
  std::string upper = s;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  if (upper == "RGC") return Method::Rgc;
  if (upper == "CSP") return Method::Csp;
  throw InvalidInput("unknown method '" + s + "' (expected RGC or CSP)");
}

namespace {

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  // Bounded draws by rejection so the permutation depends only on mt19937_64.
  auto draw = [&rng](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
      v = rng();
    } while (v >= limit);
    return v % bound;
  };
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[draw(i)]);
  return order;
}

std::vector<int> deal(const std::vector<std::size_t>& order, int folds) {
  std::vector<int> fold_of(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

}  // namespace

std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidInput("cross-validation needs at least 2 folds");
  return deal(seeded_permutation(n, seed), folds);
}

std::vector<int> assign_folds(std::span<const Label> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidInput("cross-validation needs at least 2 folds");
  std::vector<std::size_t> order = seeded_permutation(labels.size(), seed);
  std::stable_partition(order.begin(), order.end(),
                        [&](std::size_t i) { return labels[i] == Label::Positive; });
  return deal(order, folds);
}

namespace {

bool training_parts_have_both_classes(std::span<const EegSegment> segments,
                                      const std::vector<int>& fold_of, int folds) {
  for (int f = 0; f < folds; ++f) {
    bool pos = false;
    bool neg = false;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (fold_of[s] == f) continue;
      pos |= segments[s].label == Label::Positive;
      neg |= segments[s].label == Label::Negative;
    }
    if (!pos || !neg) return false;
  }
  return true;
}

struct FoldCounts {
  long correct = 0;
  long total = 0;
};

class WindowedData {
 public:
  WindowedData(std::span<const EegSegment> segments, double window_s, bool with_covariances)
      : windows_(segments.size()), covariances_(segments.size()) {
    for (std::size_t s = 0; s < segments.size(); ++s) {
      windows_[s] = split_windows(segments[s], window_s);
      if (with_covariances) {
        covariances_[s].reserve(windows_[s].size());
        for (const auto& w : windows_[s]) {
          covariances_[s].push_back(shrinkage_covariance(w).covariance);
        }
      }
    }
  }

  const std::vector<EegSegment>& windows(std::size_t s) const { return windows_[s]; }
  const std::vector<SpdMatrix>& covariances(std::size_t s) const { return covariances_[s]; }

 private:
  std::vector<std::vector<EegSegment>> windows_;
  std::vector<std::vector<SpdMatrix>> covariances_;
};

FoldCounts run_rgc_fold(const WindowedData& data, const std::vector<std::size_t>& train,
                        const std::vector<std::size_t>& test, std::span<const EegSegment> segments,
                        const CvOptions& options) {
  std::vector<SpdMatrix> covs;
  std::vector<Label> labels;
  std::vector<std::size_t> groups;
  for (const auto s : train) {
    for (const auto& c : data.covariances(s)) {
      covs.push_back(c);
      labels.push_back(segments[s].label);
      groups.push_back(segments[s].segment_id);
    }
  }
  RgcOptions rgc = options.rgc;
  if (options.svm_grid_search) {
    rgc.svm_c = select_svm_c(covs, labels, groups, options.svm_grid, 5, rgc.mean);
  }
  const RgcModel model = train_rgc(covs, labels, rgc);
  const TangentSpace space(model.reference_mean);

  FoldCounts counts;
  for (const auto s : test) {
    for (const auto& c : data.covariances(s)) {
      counts.correct += model.svm.classify(space.features(c)) == segments[s].label;
      ++counts.total;
    }
  }
  return counts;
}

FoldCounts run_csp_fold(const WindowedData& data, const std::vector<SpdMatrix>& segment_covs,
                        const std::vector<std::size_t>& train, const std::vector<std::size_t>& test,
                        std::span<const EegSegment> segments, const CvOptions& options) {
  const Eigen::Index c = segments.front().channels();
  Eigen::MatrixXd sum_pos = Eigen::MatrixXd::Zero(c, c);
  Eigen::MatrixXd sum_neg = Eigen::MatrixXd::Zero(c, c);
  double n_pos = 0;
  double n_neg = 0;
  for (const auto s : train) {
    if (segments[s].label == Label::Positive) {
      sum_pos += segment_covs[s].matrix();
      n_pos += 1;
    } else {
      sum_neg += segment_covs[s].matrix();
      n_neg += 1;
    }
  }
  const CspFilters filters = csp_filters(SpdMatrix(sum_pos / n_pos), SpdMatrix(sum_neg / n_neg),
                                         options.csp_filters);

  std::vector<Eigen::VectorXd> feats;
  std::vector<Label> labels;
  for (const auto s : train) {
    for (const auto& w : data.windows(s)) {
      feats.push_back(csp_features(filters.filters, w).values);
      labels.push_back(w.label);
    }
  }
  Eigen::MatrixXd features(options.csp_filters, static_cast<Eigen::Index>(feats.size()));
  for (std::size_t k = 0; k < feats.size(); ++k) features.col(static_cast<Eigen::Index>(k)) = feats[k];
  const LinearDecisionFunction lda = train_lda(features, labels).decision;

  FoldCounts counts;
  for (const auto s : test) {
    for (const auto& w : data.windows(s)) {
      counts.correct += lda.classify(csp_features(filters.filters, w).values) == w.label;
      ++counts.total;
    }
  }
  return counts;
}

}  // namespace

AccuracyCurve ten_fold_cv(std::span<const EegSegment> segments,
                          std::span<const double> window_lengths_s, Method method,
                          std::uint64_t seed, const CvOptions& options,
                          const std::string& subject_id) {
  const int folds = options.folds;
  if (segments.size() < static_cast<std::size_t>(folds)) {
    std::ostringstream os;
    os << "cross-validation needs at least " << folds << " segments, got " << segments.size();
    throw InvalidInput(os.str());
  }
  if (window_lengths_s.empty()) throw InvalidInput("no decision-window lengths given");
  const Eigen::Index c = segments.front().channels();
  for (const auto& s : segments) {
    if (s.channels() != c) throw InvalidInput("segments have inconsistent channel counts");
    if (s.label == Label::Unlabeled) throw InvalidInput("cross-validation segment without label");
  }

  std::vector<Label> labels;
  for (const auto& s : segments) labels.push_back(s.label);
  std::vector<int> fold_of = assign_folds(labels, folds, seed);
  if (!training_parts_have_both_classes(segments, fold_of, folds)) {
    fold_of = assign_folds(labels, folds, seed + 1);
    if (!training_parts_have_both_classes(segments, fold_of, folds)) {
      throw ProtocolError("a training fold lacks one class after reshuffling");
    }
  }

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(folds));
  for (std::size_t s = 0; s < segments.size(); ++s) {
    members[static_cast<std::size_t>(fold_of[s])].push_back(s);
  }

  std::vector<SpdMatrix> segment_covs;
  if (method == Method::Csp) {
    segment_covs.reserve(segments.size());
    for (const auto& s : segments) segment_covs.push_back(shrinkage_covariance(s).covariance);
  }

  std::vector<double> windows(window_lengths_s.begin(), window_lengths_s.end());
  std::sort(windows.begin(), windows.end(), std::greater<>());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());

  AccuracyCurve curve{subject_id, method, {}};
  for (const double tau : windows) {
    const WindowedData data(segments, tau, method == Method::Rgc);
    FoldCounts pooled;
    for (int f = 0; f < folds; ++f) {
      const auto& test = members[static_cast<std::size_t>(f)];
      std::vector<std::size_t> train;
      for (int g = 0; g < folds; ++g) {
        if (g == f) continue;
        const auto& m = members[static_cast<std::size_t>(g)];
        train.insert(train.end(), m.begin(), m.end());
      }
      std::sort(train.begin(), train.end());
      if (options.on_fold) {
        std::vector<std::size_t> train_ids;
        std::vector<std::size_t> test_ids;
        for (const auto s : train) train_ids.push_back(segments[s].segment_id);
        for (const auto s : test) test_ids.push_back(segments[s].segment_id);
        options.on_fold(tau, f, train_ids, test_ids);
      }
      const FoldCounts counts =
          method == Method::Rgc ? run_rgc_fold(data, train, test, segments, options)
                                : run_csp_fold(data, segment_covs, train, test, segments, options);
      pooled.correct += counts.correct;
      pooled.total += counts.total;
    }
    curve.entries.push_back(CurveEntry{
        tau, static_cast<double>(pooled.correct) / static_cast<double>(pooled.total),
        pooled.total, pooled.correct});
  }
  return curve;
}

}  // namespace rgc
