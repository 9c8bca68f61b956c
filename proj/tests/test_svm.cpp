#include "rgc/classifiers.hpp"
#include "rgc/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace rgc;

namespace {

std::vector<Label> labels_of(const std::vector<int>& y) {
  std::vector<Label> out;
  for (int v : y) out.push_back(v > 0 ? Label::Positive : Label::Negative);
  return out;
}

// Exact dual optimum by enumerating every split of the examples into
// {alpha = 0, alpha = c, free} and solving the face's KKT system.
double dual_optimum_by_enumeration(const Eigen::MatrixXd& x, const std::vector<int>& y, double c) {
  const int n = static_cast<int>(y.size());
  Eigen::VectorXd yv(n);
  for (int i = 0; i < n; ++i) yv(i) = y[i];
  const Eigen::MatrixXd q = yv.asDiagonal() * (x.transpose() * x) * yv.asDiagonal();
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  double best = -std::numeric_limits<double>::infinity();
  for (int code = 0; code < combos; ++code) {
    std::vector<int> state(n);
    for (int i = 0, r = code; i < n; ++i, r /= 3) state[i] = r % 3;  // 0: zero, 1: at c, 2: free
    std::vector<int> free;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (state[i] == 1) alpha(i) = c;
      if (state[i] == 2) free.push_back(i);
    }
    const int m = static_cast<int>(free.size());
    if (m > 0) {
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
      Eigen::VectorXd rhs(m + 1);
      const Eigen::VectorXd fixed_grad = q * alpha;
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) kkt(a, b) = q(free[a], free[b]);
        kkt(a, m) = yv(free[a]);
        kkt(m, a) = yv(free[a]);
        rhs(a) = 1.0 - fixed_grad(free[a]);
      }
      rhs(m) = -yv.dot(alpha);
      const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      if ((kkt * sol - rhs).norm() > 1e-9) continue;
      for (int a = 0; a < m; ++a) alpha(free[a]) = sol(a);
    }
    if (std::abs(yv.dot(alpha)) > 1e-9) continue;
    if ((alpha.array() < -1e-12).any() || (alpha.array() > c + 1e-12).any()) continue;
    best = std::max(best, alpha.sum() - 0.5 * alpha.dot(q * alpha));
  }
  return best;
}

}  // namespace

TEST_CASE("SVM on two 1-D points") {
  Eigen::MatrixXd x(1, 2);
  x << -1, 1;
  const auto labels = labels_of({-1, 1});
  const auto r = train_linear_svm(x, labels, 1.0);
  CHECK(r.converged);
  CHECK(r.decision.weights(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::abs(r.decision.bias) < 1e-6);
  CHECK(r.decision.classify(x.col(0)) == Label::Negative);
  CHECK(r.decision.classify(x.col(1)) == Label::Positive);
}

TEST_CASE("SVM separates a separable 2-D set") {
  std::mt19937_64 rng(1);
  const int n = 80;
  Eigen::MatrixXd x = rgc::testing::gaussian_matrix(2, n, rng) * 0.5;
  std::vector<int> y(n);
  for (int k = 0; k < n; ++k) {
    y[k] = k % 2 ? 1 : -1;
    x(0, k) += 2.0 * y[k];
    x(1, k) += 1.0;
  }
  const auto labels = labels_of(y);
  const auto r = train_linear_svm(x, labels, 10.0);
  CHECK(r.converged);
  for (int k = 0; k < n; ++k) CHECK(r.decision.classify(x.col(k)) == labels[k]);
}

TEST_CASE("SVM objective matches exact dual on 5-point instances") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::MatrixXd x = rgc::testing::gaussian_matrix(2, 5, rng);
    const std::vector<int> y{1, -1, 1, -1, trial % 2 ? 1 : -1};
    const double c = trial % 3 == 0 ? 0.3 : 2.0;
    const auto labels = labels_of(y);
    const auto r = train_linear_svm(x, labels, c);
    const double oracle = dual_optimum_by_enumeration(x, y, c);
    const double primal = svm_primal_objective(x, labels, c, r.decision);
    CHECK(r.converged);
    CHECK(primal == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(std::abs(primal - oracle) < 1e-4);
    CHECK(r.duality_gap <= 1e-6 * std::max(1.0, std::abs(r.primal)));
  }
}

TEST_CASE("SVM solution satisfies KKT") {
  std::mt19937_64 rng(3);
  const int n = 300;
  const int d = 10;
  Eigen::MatrixXd x = rgc::testing::gaussian_matrix(d, n, rng);
  std::vector<int> y(n);
  for (int k = 0; k < n; ++k) {
    y[k] = k % 3 ? 1 : -1;
    x(0, k) += 0.8 * y[k];
  }
  const auto labels = labels_of(y);
  const double c = 0.5;
  const auto r = train_linear_svm(x, labels, c);
  CHECK(r.converged);
  const double tol = 1e-2;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < n; ++k) {
    const double margin = y[k] * r.decision.value(x.col(k));
    const double a = r.alphas(k);
    CHECK(a >= 0.0);
    CHECK(a <= c);
    if (a <= 0.0) CHECK(margin >= 1.0 - tol);
    if (a >= c) CHECK(margin <= 1.0 + tol);
    // Nonzero slack only inside the margin and only at the box bound.
    if (margin < 1.0 - tol) CHECK(a == doctest::Approx(c));
    w += a * y[k] * x.col(k);
  }
  CHECK((w - r.decision.weights).norm() < 1e-10);
  CHECK(r.alphas.dot(Eigen::Map<const Eigen::VectorXi>(y.data(), n).cast<double>()) ==
        doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("SVM degenerate and invalid inputs") {
  const Eigen::MatrixXd same = Eigen::MatrixXd::Ones(3, 6);
  const auto labels = labels_of({1, -1, 1, -1, 1, -1});
  const auto r = train_linear_svm(same, labels, 1.0);
  CHECK(r.low_confidence);
  CHECK(r.decision.weights.norm() < 1e-12);

  CHECK_THROWS_AS(train_linear_svm(same, labels_of({1, 1, 1, 1, 1, 1}), 1.0), InvalidInput);
  CHECK_THROWS_AS(train_linear_svm(same, labels, 0.0), InvalidInput);
  CHECK_THROWS_AS(train_linear_svm(same, labels_of({1, -1}), 1.0), InvalidInput);
}

TEST_CASE("decision tie maps to +1") {
  LinearDecisionFunction d{Eigen::Vector2d(1.0, -1.0), 0.0};
  CHECK(d.classify(Eigen::Vector2d(2.0, 2.0)) == Label::Positive);
  CHECK(d.classify(Eigen::Vector2d(1.0, 2.0)) == Label::Negative);
}

TEST_CASE("SVM training is deterministic") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = rgc::testing::gaussian_matrix(5, 60, rng);
  std::vector<int> y(60);
  for (int k = 0; k < 60; ++k) y[k] = (x(0, k) + 0.3 * x(1, k) > 0) ? 1 : -1;
  const auto labels = labels_of(y);
  const auto a = train_linear_svm(x, labels, 1.0);
  const auto b = train_linear_svm(x, labels, 1.0);
  CHECK(a.decision.weights == b.decision.weights);
  CHECK(a.decision.bias == b.decision.bias);
}
