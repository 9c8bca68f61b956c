#include "rgc/error.hpp"
#include "rgc/spd.hpp"
#include "support.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

using namespace rgc;
using rgc::testing::random_spd;
using rgc::testing::rel_frobenius;

namespace {

Eigen::MatrixXd diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

// Roots of det(A - lambda I) for a symmetric 3x3 matrix via the
// trigonometric cubic solution, sorted descending.
std::array<double, 3> cubic_eigenvalues(const Eigen::Matrix3d& a) {
  const double q = a.trace() / 3.0;
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const Eigen::Matrix3d b = (a - q * Eigen::Matrix3d::Identity()) / p;
  const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {e1, 3.0 * q - e1 - e3, e3};
}

// exp by scaling and squaring of a truncated Taylor series; independent of
// any eigendecomposition.
Eigen::MatrixXd taylor_exp(const Eigen::MatrixXd& s) {
  const double norm = s.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const Eigen::MatrixXd x = s / std::pow(2.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(s.rows(), s.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * x / k;
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace

TEST_CASE("SymmetricMatrix validation") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2.5, 1;
  CHECK_THROWS_AS(SymmetricMatrix{m}, InvalidInput);
  CHECK_THROWS_AS(SymmetricMatrix{Eigen::MatrixXd(2, 3)}, InvalidInput);
  m << 1, std::nan(""), std::nan(""), 1;
  CHECK_THROWS_AS(SymmetricMatrix{m}, InvalidInput);
  m << 1, 0, 0, -1;
  CHECK_THROWS_AS(SpdMatrix{m}, NotPositiveDefinite);
}

TEST_CASE("sym_eig") {
  SUBCASE("identity") {
    const auto e = sym_eig(SymmetricMatrix(Eigen::MatrixXd::Identity(3, 3)));
    CHECK(e.eigenvalues.isApprox(Eigen::Vector3d::Ones()));
    CHECK((e.eigenvectors.transpose() * e.eigenvectors).isIdentity(1e-12));
  }
  SUBCASE("diagonal sorted descending") {
    const auto e = sym_eig(SymmetricMatrix(diag({5, 2, 9})));
    CHECK(e.eigenvalues(0) == doctest::Approx(9));
    CHECK(e.eigenvalues(1) == doctest::Approx(5));
    CHECK(e.eigenvalues(2) == doctest::Approx(2));
  }
  SUBCASE("2x2 against characteristic polynomial") {
    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 2;
    // lambda^2 - tr lambda + det = 0
    const double tr = a.trace();
    const double det = a.determinant();
    const double disc = std::sqrt(tr * tr / 4.0 - det);
    const auto e = sym_eig(SymmetricMatrix(a));
    CHECK(e.eigenvalues(0) == doctest::Approx(tr / 2.0 + disc).epsilon(1e-14));
    CHECK(e.eigenvalues(1) == doctest::Approx(tr / 2.0 - disc).epsilon(1e-14));
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(e.eigenvectors(0, 0)) - h) < 1e-12);
    CHECK(std::abs(e.eigenvectors(0, 0) - e.eigenvectors(1, 0)) < 1e-12);
    CHECK(std::abs(e.eigenvectors(0, 1) + e.eigenvectors(1, 1)) < 1e-12);
  }
  SUBCASE("random 3x3 against cubic formula") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::Matrix3d a = rgc::testing::gaussian_matrix(3, 3, rng);
      const Eigen::Matrix3d s = a + a.transpose();
      const auto oracle = cubic_eigenvalues(s);
      const auto e = sym_eig(SymmetricMatrix(s));
      for (int i = 0; i < 3; ++i) CHECK(std::abs(e.eigenvalues(i) - oracle[i]) < 1e-9);
      CHECK((e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.transpose())
                .isApprox(Eigen::MatrixXd(s), 1e-12));
    }
  }
}

TEST_CASE("matrix_log") {
  CHECK(matrix_log(SpdMatrix::identity(4)).matrix().isZero(1e-15));
  const auto l = matrix_log(SpdMatrix(diag({std::exp(1.0), 1.0})));
  CHECK(l.matrix().isApprox(diag({1.0, 0.0}), 1e-14));

  Eigen::MatrixXd a(2, 2);
  a << 2, 1, 1, 2;
  // Eigenvalues 3 and 1 with eigenvectors (1,1)/sqrt2, (1,-1)/sqrt2.
  const Eigen::MatrixXd oracle = 0.5 * std::log(3.0) * Eigen::MatrixXd::Ones(2, 2);
  CHECK(matrix_log(SpdMatrix(a)).matrix().isApprox(oracle, 1e-14));
  CHECK(oracle(0, 0) == doctest::Approx(0.5493).epsilon(1e-4));

  CHECK_THROWS_AS(matrix_log(SpdMatrix(diag({1.0, 1e-13}))), NotPositiveDefinite);
}

TEST_CASE("matrix_exp") {
  CHECK(matrix_exp(SymmetricMatrix::zero(3)).matrix().isIdentity(1e-15));
  CHECK(matrix_exp(SymmetricMatrix(diag({1, 0}))).matrix().isApprox(diag({std::exp(1.0), 1.0})));
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd s = rgc::testing::gaussian_matrix(5, 5, rng);
    s = (0.5 * (s + s.transpose())).eval();
    CHECK(rel_frobenius(matrix_exp(SymmetricMatrix(s)).matrix(), taylor_exp(s)) < 1e-12);
  }
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd r = random_spd(6, 1e4, rng);
    CHECK(rel_frobenius(matrix_exp(matrix_log(SpdMatrix(r))).matrix(), r) < 1e-10);
  }
}

TEST_CASE("square roots") {
  CHECK(inv_sqrt(SpdMatrix::identity(3)).matrix().isIdentity());
  CHECK(inv_sqrt(SpdMatrix(diag({4, 9}))).matrix().isApprox(diag({0.5, 1.0 / 3.0})));
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd r = random_spd(5, 100, rng);
  const Eigen::MatrixXd s = matrix_sqrt(SpdMatrix(r)).matrix();
  const Eigen::MatrixXd is = inv_sqrt(SpdMatrix(r)).matrix();
  CHECK((s * s).isApprox(r, 1e-12));
  CHECK((is * r * is).isIdentity(1e-10));
}

TEST_CASE("riemannian_distance") {
  std::mt19937_64 rng(5);
  const SpdMatrix r(random_spd(4, 50, rng));
  CHECK(riemannian_distance(r, r) < 1e-12);
  CHECK(riemannian_distance(SpdMatrix::identity(2), SpdMatrix(diag({std::exp(2.0), 1.0}))) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(riemannian_distance(SpdMatrix::identity(2), SpdMatrix::identity(3)),
                  InvalidInput);

  // Oracle: generalized eigenvalues of the pencil (S, R).
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd a = random_spd(6, 1e3, rng);
    const Eigen::MatrixXd b = random_spd(6, 1e3, rng);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(b, a);
    const double oracle = std::sqrt(ges.eigenvalues().array().log().square().sum());
    const double d = riemannian_distance(SpdMatrix(a), SpdMatrix(b));
    CHECK(d == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(riemannian_distance(SpdMatrix(b), SpdMatrix(a)) == doctest::Approx(d).epsilon(1e-10));
  }
}

TEST_CASE("log_euclidean_mean") {
  std::mt19937_64 rng(9);
  const SpdMatrix r(random_spd(3, 10, rng));
  const std::vector<SpdMatrix> same{r, r, r};
  CHECK(log_euclidean_mean(same).matrix().isApprox(r.matrix(), 1e-12));

  const std::vector<SpdMatrix> pair{SpdMatrix(diag({1, 1})), SpdMatrix(diag({4, 9}))};
  CHECK(log_euclidean_mean(pair).matrix().isApprox(diag({2, 3}), 1e-14));

  const std::vector<SpdMatrix> sym{SpdMatrix(diag({7, 1})), SpdMatrix(diag({1.0 / 7.0, 1}))};
  CHECK(log_euclidean_mean(sym).matrix().isIdentity(1e-14));

  CHECK_THROWS_AS(log_euclidean_mean(std::span<const SpdMatrix>{}), InvalidInput);
}

TEST_CASE("riemannian_mean_iterative") {
  std::mt19937_64 rng(13);
  const SpdMatrix r(random_spd(4, 20, rng));
  const std::vector<SpdMatrix> single{r};
  CHECK(riemannian_mean_iterative(single).mean.matrix().isApprox(r.matrix(), 1e-12));

  SUBCASE("commuting set equals log-Euclidean mean") {
    std::vector<SpdMatrix> set;
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int k = 0; k < 7; ++k) set.emplace_back(diag({u(rng), u(rng), u(rng)}));
    const auto it = riemannian_mean_iterative(set);
    CHECK(it.converged);
    CHECK((it.mean.matrix() - log_euclidean_mean(set).matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("non-commuting set satisfies Karcher condition") {
    std::vector<SpdMatrix> set;
    for (int k = 0; k < 20; ++k) set.emplace_back(random_spd(5, 100, rng));
    const auto it = riemannian_mean_iterative(set);
    CHECK(it.converged);
    CHECK(it.gradient_norm < 1e-8);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(5, 5);
    for (const auto& s : set) grad += tangent_map(it.mean, s).matrix();
    CHECK((grad / 20.0).norm() < 1e-8);
    // Congruence equivariance: mean(A R A^T) = A mean(R) A^T.
    const Eigen::MatrixXd a = rgc::testing::gaussian_matrix(5, 5, rng);
    std::vector<SpdMatrix> moved;
    for (const auto& s : set) moved.emplace_back(a * s.matrix() * a.transpose());
    const auto moved_mean = riemannian_mean_iterative(moved);
    CHECK(rel_frobenius(moved_mean.mean.matrix(), a * it.mean.matrix() * a.transpose()) < 1e-7);
  }
}

TEST_CASE("tangent_map and half_vectorize") {
  std::mt19937_64 rng(17);
  const SpdMatrix g(random_spd(4, 30, rng));
  CHECK(tangent_map(g, g).matrix().isZero(1e-12));
  CHECK(tangent_map(SpdMatrix::identity(2), SpdMatrix(diag({std::exp(1.0), 1.0})))
            .matrix()
            .isApprox(diag({1, 0}), 1e-14));

  CHECK(half_vectorize(SymmetricMatrix(Eigen::MatrixXd::Identity(3, 3))).size() == 6);
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 3;
  const Eigen::VectorXd v = half_vectorize(SymmetricMatrix(m));
  REQUIRE(v.size() == 3);
  CHECK(v(0) == 1.0);
  CHECK(v(1) == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(v(2) == 3.0);
  CHECK(unhalf_vectorize(v).matrix().isApprox(m));
  CHECK_THROWS_AS(unhalf_vectorize(Eigen::VectorXd::Zero(4)), InvalidInput);

  // ||f||_2 equals the Riemannian distance to the reference.
  const TangentSpace space(g);
  for (int trial = 0; trial < 20; ++trial) {
    const SpdMatrix r(random_spd(4, 1e3, rng));
    CHECK(space.features(r).norm() == doctest::Approx(riemannian_distance(g, r)).epsilon(1e-10));
    CHECK(space.map(r).matrix().isApprox(tangent_map(g, r).matrix(), 1e-10));
  }
}
