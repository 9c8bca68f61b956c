#pragma once

// Shared helpers for the unit and acceptance tests.

#include "rgc/spd.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace rgc::testing {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n01(rng);
  return m;
}

inline Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(n, n, rng));
  return qr.householderQ();
}

// Q diag(lambda) Q^T with log-uniform eigenvalues spanning `condition`.
inline Eigen::MatrixXd random_spd(Eigen::Index n, double condition, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) lambda(i) = std::pow(condition, u(rng));
  lambda(0) = 1.0;
  if (n > 1) lambda(n - 1) = condition;
  const Eigen::MatrixXd q = random_orthogonal(n, rng);
  Eigen::MatrixXd m = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

inline double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / b.norm();
}

}  // namespace rgc::testing
