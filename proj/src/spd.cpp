#include "rgc/spd.hpp"

#include "rgc/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rgc {

namespace {

constexpr double kSymmetryTolerance = 1e-10;

void check_square_finite(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw InvalidInput(os.str());
  }
  if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entries");
}

void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    std::ostringstream os;
    os << what << ": matrix is not symmetric (max |a_ij - a_ji| = " << asym << ")";
    throw InvalidInput(os.str());
  }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Eigendecomposition of an SPD matrix with the relative floor enforced.
EigenDecomposition checked_spd_eig(const SpdMatrix& r) {
  EigenDecomposition e = sym_eig(r);
  const double largest = e.eigenvalues(0);
  const double smallest = e.eigenvalues(e.eigenvalues.size() - 1);
  if (!(largest > 0.0) || smallest <= kEigenvalueFloor * largest) {
    std::ostringstream os;
    os << "matrix is not positive definite: eigenvalue range [" << smallest << ", " << largest
       << "]";
    throw NotPositiveDefinite(os.str());
  }
  return e;
}

template <typename F>
Eigen::MatrixXd apply_spectral(const EigenDecomposition& e, F&& f) {
  Eigen::VectorXd mapped = e.eigenvalues.unaryExpr(f);
  return e.eigenvectors * mapped.asDiagonal() * e.eigenvectors.transpose();
}

void check_same_dim(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "dimension mismatch: " << a.dim() << " vs " << b.dim();
    throw InvalidInput(os.str());
  }
}

void check_set(std::span<const SpdMatrix> set) {
  if (set.empty()) throw InvalidInput("mean of an empty set");
  for (const auto& m : set) check_same_dim(set.front(), m);
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(const Eigen::MatrixXd& m) {
  check_square_finite(m, "SymmetricMatrix");
  check_symmetric(m, "SymmetricMatrix");
  m_ = symmetrized(m);
}

SymmetricMatrix SymmetricMatrix::zero(Eigen::Index dim) {
  return SymmetricMatrix(Eigen::MatrixXd::Zero(dim, dim), Trusted{});
}

SpdMatrix::SpdMatrix(const Eigen::MatrixXd& m) : SymmetricMatrix(m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m_);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("SpdMatrix: Cholesky factorization failed");
  }
}

SpdMatrix SpdMatrix::identity(Eigen::Index dim) {
  return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim), Trusted{});
}

SpdMatrix SpdMatrix::from_trusted(const Eigen::MatrixXd& m) {
  return SpdMatrix(symmetrized(m), Trusted{});
}

EigenDecomposition sym_eig(const SymmetricMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("sym_eig: eigensolver failed to converge");
  }
  // Eigen returns ascending order.
  EigenDecomposition e;
  e.eigenvalues = solver.eigenvalues().reverse();
  e.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return e;
}

SymmetricMatrix matrix_log(const SpdMatrix& r) {
  const auto e = checked_spd_eig(r);
  return SymmetricMatrix(symmetrized(apply_spectral(e, [](double x) { return std::log(x); })));
}

SpdMatrix matrix_exp(const SymmetricMatrix& s) {
  const auto e = sym_eig(s);
  return SpdMatrix::from_trusted(apply_spectral(e, [](double x) { return std::exp(x); }));
}

SpdMatrix matrix_sqrt(const SpdMatrix& r) {
  const auto e = checked_spd_eig(r);
  return SpdMatrix::from_trusted(apply_spectral(e, [](double x) { return std::sqrt(x); }));
}

SpdMatrix inv_sqrt(const SpdMatrix& r) {
  const auto e = checked_spd_eig(r);
  return SpdMatrix::from_trusted(apply_spectral(e, [](double x) { return 1.0 / std::sqrt(x); }));
}

double riemannian_distance(const SpdMatrix& r, const SpdMatrix& s) {
  check_same_dim(r, s);
  const Eigen::MatrixXd w = inv_sqrt(r).matrix();
  const SpdMatrix whitened = SpdMatrix::from_trusted(w * s.matrix() * w);
  const auto e = checked_spd_eig(whitened);
  return std::sqrt(e.eigenvalues.unaryExpr([](double x) { return std::log(x); }).squaredNorm());
}

SpdMatrix log_euclidean_mean(std::span<const SpdMatrix> set) {
  check_set(set);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(set.front().dim(), set.front().dim());
  for (const auto& m : set) acc += matrix_log(m).matrix();
  acc /= static_cast<double>(set.size());
  return matrix_exp(SymmetricMatrix(acc));
}

IterativeMeanResult riemannian_mean_iterative(std::span<const SpdMatrix> set, double tol,
                                              int max_iter) {
  check_set(set);
  if (!(tol > 0.0)) throw InvalidInput("riemannian_mean_iterative: tol must be positive");
  if (max_iter < 0) throw InvalidInput("riemannian_mean_iterative: max_iter must be >= 0");

  const Eigen::Index n = set.front().dim();
  SpdMatrix current = log_euclidean_mean(set);
  IterativeMeanResult best{current, false, 0, std::numeric_limits<double>::infinity()};

  for (int iter = 0;; ++iter) {
    const auto e = checked_spd_eig(current);
    const Eigen::MatrixXd half =
        apply_spectral(e, [](double x) { return std::sqrt(x); });
    const Eigen::MatrixXd inv_half =
        apply_spectral(e, [](double x) { return 1.0 / std::sqrt(x); });

    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, n);
    for (const auto& r : set) {
      grad += matrix_log(SpdMatrix::from_trusted(inv_half * r.matrix() * inv_half)).matrix();
    }
    grad /= static_cast<double>(set.size());
    const double norm = grad.norm();

    if (norm < best.gradient_norm) best = IterativeMeanResult{current, false, iter, norm};
    if (norm < tol) {
      best.converged = true;
      return best;
    }
    if (iter >= max_iter) return best;

    const Eigen::MatrixXd step = matrix_exp(SymmetricMatrix(symmetrized(grad))).matrix();
    current = SpdMatrix::from_trusted(half * step * half);
  }
}

SymmetricMatrix tangent_map(const SpdMatrix& reference, const SpdMatrix& r) {
  check_same_dim(reference, r);
  return TangentSpace(reference).map(r);
}

Eigen::VectorXd half_vectorize(const SymmetricMatrix& t) {
  const Eigen::Index n = t.dim();
  Eigen::VectorXd v(half_vector_length(n));
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    v(k++) = t(j, j);
    for (Eigen::Index i = j + 1; i < n; ++i) v(k++) = M_SQRT2 * t(i, j);
  }
  return v;
}

SymmetricMatrix unhalf_vectorize(const Eigen::VectorXd& v) {
  const auto len = v.size();
  const auto n = static_cast<Eigen::Index>(std::llround((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
  if (n <= 0 || half_vector_length(n) != len) {
    throw InvalidInput("unhalf_vectorize: length is not a triangular number");
  }
  Eigen::MatrixXd m(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    m(j, j) = v(k++);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      m(i, j) = m(j, i) = v(k++) / M_SQRT2;
    }
  }
  return SymmetricMatrix(m);
}

TangentSpace::TangentSpace(const SpdMatrix& reference)
    : reference_(reference), whitening_(inv_sqrt(reference).matrix()) {}

SymmetricMatrix TangentSpace::map(const SpdMatrix& r) const {
  check_same_dim(reference_, r);
  return matrix_log(SpdMatrix::from_trusted(whitening_ * r.matrix() * whitening_));
}

}  // namespace rgc
