#include "rgc/classifiers.hpp"

#include "rgc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <string>

namespace rgc {

namespace {

constexpr double kTau = 1e-12;

Eigen::VectorXd signs(std::span<const Label> labels) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == Label::Unlabeled) throw InvalidInput("SVM training example without label");
    y(static_cast<Eigen::Index>(k)) = to_int(labels[k]);
  }
  return y;
}

// Minimizes sum_k max(0, 1 - y_k (f_k + b)) over b. The objective is convex
// piecewise linear with breakpoints 1 - f_k (positives) and -1 - f_k
// (negatives); returns the midpoint of the minimizing interval.
double optimal_bias(const Eigen::VectorXd& f, const Eigen::VectorXd& y) {
  std::vector<double> upper;  // positives: max(0, u - b)
  std::vector<double> lower;  // negatives: max(0, b - l)
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    if (y(k) > 0) upper.push_back(1.0 - f(k));
    else lower.push_back(-1.0 - f(k));
  }
  std::sort(upper.begin(), upper.end());
  std::sort(lower.begin(), lower.end());
  std::vector<double> upper_suffix(upper.size() + 1, 0.0);
  for (std::size_t i = upper.size(); i-- > 0;) upper_suffix[i] = upper_suffix[i + 1] + upper[i];
  std::vector<double> lower_prefix(lower.size() + 1, 0.0);
  for (std::size_t i = 0; i < lower.size(); ++i) lower_prefix[i + 1] = lower_prefix[i] + lower[i];

  auto loss = [&](double b) {
    const auto iu = static_cast<std::size_t>(
        std::upper_bound(upper.begin(), upper.end(), b) - upper.begin());
    const auto il = static_cast<std::size_t>(
        std::lower_bound(lower.begin(), lower.end(), b) - lower.begin());
    const double pos = upper_suffix[iu] - b * static_cast<double>(upper.size() - iu);
    const double neg = b * static_cast<double>(il) - lower_prefix[il];
    return pos + neg;
  };

  std::vector<double> candidates = upper;
  candidates.insert(candidates.end(), lower.begin(), lower.end());
  std::sort(candidates.begin(), candidates.end());
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> values(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    values[i] = loss(candidates[i]);
    best = std::min(best, values[i]);
  }
  const double slack = 1e-12 * std::max(1.0, std::abs(best));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (values[i] <= best + slack) {
      lo = std::min(lo, candidates[i]);
      hi = std::max(hi, candidates[i]);
    }
  }
  return 0.5 * (lo + hi);
}

// LRU cache of kernel rows K(:, i) = X^T x_i.
class KernelRowCache {
 public:
  KernelRowCache(const Eigen::MatrixXd& features, std::size_t budget_bytes)
      : features_(features),
        capacity_(std::max<std::size_t>(
            2, budget_bytes / (sizeof(double) * static_cast<std::size_t>(features.cols()) + 1))),
        slot_of_(static_cast<std::size_t>(features.cols()), kNone) {
    slots_.reserve(std::min(capacity_, slot_of_.size()));
  }

  const Eigen::VectorXd& row(Eigen::Index i) {
    const auto idx = static_cast<std::size_t>(i);
    if (slot_of_[idx] != kNone) {
      auto& slot = slots_[slot_of_[idx]];
      lru_.splice(lru_.begin(), lru_, slot.position);
      return slot.values;
    }
    std::size_t s;
    if (slots_.size() < capacity_) {
      s = slots_.size();
      slots_.emplace_back();
    } else {
      s = lru_.back();
      lru_.pop_back();
      slot_of_[slots_[s].owner] = kNone;
    }
    auto& slot = slots_[s];
    slot.owner = idx;
    slot.values.noalias() = features_.transpose() * features_.col(i);
    lru_.push_front(s);
    slot.position = lru_.begin();
    slot_of_[idx] = s;
    return slot.values;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  struct Slot {
    std::size_t owner = 0;
    Eigen::VectorXd values;
    std::list<std::size_t>::iterator position;
  };
  const Eigen::MatrixXd& features_;
  std::size_t capacity_;
  std::vector<std::size_t> slot_of_;
  std::vector<Slot> slots_;
  std::list<std::size_t> lru_;
};

double hinge_sum(const Eigen::VectorXd& f, const Eigen::VectorXd& y, double b) {
  return (1.0 - y.array() * (f.array() + b)).max(0.0).sum();
}

}  // namespace

double svm_primal_objective(const Eigen::MatrixXd& features, std::span<const Label> labels,
                            double c, const LinearDecisionFunction& d) {
  const Eigen::VectorXd y = signs(labels);
  const Eigen::VectorXd f = features.transpose() * d.weights;
  return 0.5 * d.weights.squaredNorm() + c * hinge_sum(f, y, d.bias);
}

SvmResult train_linear_svm(const Eigen::MatrixXd& features, std::span<const Label> labels,
                           double c, const SvmOptions& options) {
  const Eigen::Index n = features.cols();
  const Eigen::Index dim = features.rows();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw InvalidInput("SVM: feature/label count mismatch");
  }
  if (!(c > 0.0)) throw InvalidInput("SVM: cost c must be positive");
  if (!features.allFinite()) throw InvalidInput("SVM: non-finite features");
  const Eigen::VectorXd y = signs(labels);
  if ((y.array() > 0).count() == 0 || (y.array() < 0).count() == 0) {
    throw InvalidInput("SVM: training set must contain both classes");
  }

  const Eigen::VectorXd diag = features.colwise().squaredNorm().transpose();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);  // w^T x_k
  KernelRowCache cache(features, options.cache_bytes);

  SvmResult result;
  const long max_iterations = options.max_epochs * std::max<long>(1, static_cast<long>(n));

  auto evaluate_gap = [&]() {
    const double b = optimal_bias(f, y);
    const double wsq = w.squaredNorm();
    result.primal = 0.5 * wsq + c * hinge_sum(f, y, b);
    result.dual = alpha.sum() - 0.5 * wsq;
    result.duality_gap = result.primal - result.dual;
    result.decision = LinearDecisionFunction{w, b};
    return result.duality_gap <= options.gap_tolerance * std::max(1.0, std::abs(result.primal));
  };

  const long gap_interval = std::max<long>(32, static_cast<long>(n) / 16);
  long iter = 0;
  for (; iter < max_iterations; ++iter) {
    // Gradient of 1/2 a^T Q a - e^T a is y_k f_k - 1.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -y(t) * (y(t) * f(t) - 1.0);
      const bool up = (y(t) > 0) ? alpha(t) < c : alpha(t) > 0.0;
      const bool low = (y(t) > 0) ? alpha(t) > 0.0 : alpha(t) < c;
      if (up && v > gmax) {
        gmax = v;
        i = t;
      }
      if (low && v < gmin) gmin = v;
    }
    const bool kkt_done = i < 0 || gmax - gmin < 1e-12;
    if (kkt_done || iter % gap_interval == 0) {
      if (evaluate_gap() || kkt_done) break;
    }

    const Eigen::VectorXd& kernel_row = cache.row(i);
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const bool low = (y(t) > 0) ? alpha(t) > 0.0 : alpha(t) < c;
      if (!low) continue;
      const double v = -y(t) * (y(t) * f(t) - 1.0);
      const double b = gmax - v;
      if (b <= 0.0) continue;
      double a = diag(i) + diag(t) - 2.0 * kernel_row(t);
      if (a <= 0.0) a = kTau;
      const double score = -(b * b) / a;
      if (score <= best) {
        best = score;
        j = t;
      }
    }
    if (j < 0) {
      evaluate_gap();
      break;
    }

    const double gi = y(i) * f(i) - 1.0;
    const double gj = y(j) * f(j) - 1.0;
    const double kij = kernel_row(j);
    const double qij = y(i) * y(j) * kij;
    const double old_i = alpha(i);
    const double old_j = alpha(j);
    double ai = old_i;
    double aj = old_j;
    if (y(i) != y(j)) {
      double quad = diag(i) + diag(j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-gi - gj) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > c) {
          ai = c;
          aj = c - diff;
        }
      } else if (aj > c) {
        aj = c;
        ai = c + diff;
      }
    } else {
      double quad = diag(i) + diag(j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (gi - gj) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c) {
        if (ai > c) {
          ai = c;
          aj = sum - c;
        }
        if (aj > c) {
          aj = c;
          ai = sum - c;
        }
      } else {
        if (aj < 0.0) {
          aj = 0.0;
          ai = sum;
        }
        if (ai < 0.0) {
          ai = 0.0;
          aj = sum;
        }
      }
    }
    alpha(i) = ai;
    alpha(j) = aj;

    const double di = (ai - old_i) * y(i);
    const double dj = (aj - old_j) * y(j);
    w.noalias() += di * features.col(i) + dj * features.col(j);
    f.noalias() += di * cache.row(i);
    f.noalias() += dj * cache.row(j);
  }
  if (iter >= max_iterations) evaluate_gap();

  result.alphas = alpha;
  result.iterations = iter;
  result.converged =
      result.duality_gap <= options.gap_tolerance * std::max(1.0, std::abs(result.primal));
  result.low_confidence = w.norm() <= 1e-12;
  return result;
}

}  // namespace rgc
