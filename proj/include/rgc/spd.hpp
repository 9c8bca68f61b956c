#pragma once

// Matrix functions and affine-invariant geometry on symmetric positive
// definite (SPD) matrices.

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace rgc {

/// Dense real symmetric matrix. Construction validates squareness, finiteness
/// and symmetry (|a_ij - a_ji| <= 1e-10 * max(1, max|a|)) and stores the
/// exactly symmetrized entries.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(const Eigen::MatrixXd& m);

  static SymmetricMatrix zero(Eigen::Index dim);

  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 protected:
  struct Trusted {};
  SymmetricMatrix(Eigen::MatrixXd m, Trusted) : m_(std::move(m)) {}

  Eigen::MatrixXd m_;
};

/// Symmetric positive definite matrix. The constructor checks symmetry and a
/// successful Cholesky factorization; the stricter relative eigenvalue floor
/// is enforced by the matrix functions that need it.
class SpdMatrix : public SymmetricMatrix {
 public:
  explicit SpdMatrix(const Eigen::MatrixXd& m);

  static SpdMatrix identity(Eigen::Index dim);

  /// Wraps a matrix that is SPD by construction (e.g. V exp(L) V^T).
  /// Symmetrizes but performs no definiteness check.
  static SpdMatrix from_trusted(const Eigen::MatrixXd& m);

 private:
  explicit SpdMatrix(Eigen::MatrixXd m, Trusted t) : SymmetricMatrix(std::move(m), t) {}
};

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

/// Smallest admissible eigenvalue relative to the largest one.
inline constexpr double kEigenvalueFloor = 1e-12;

EigenDecomposition sym_eig(const SymmetricMatrix& m);

SymmetricMatrix matrix_log(const SpdMatrix& r);
SpdMatrix matrix_exp(const SymmetricMatrix& s);
SpdMatrix matrix_sqrt(const SpdMatrix& r);
SpdMatrix inv_sqrt(const SpdMatrix& r);

/// Affine-invariant distance ||log(R^-1 S)||_F, evaluated through the
/// eigenvalues of the congruent symmetric matrix R^-1/2 S R^-1/2.
double riemannian_distance(const SpdMatrix& r, const SpdMatrix& s);

/// exp of the arithmetic mean of the matrix logarithms.
SpdMatrix log_euclidean_mean(std::span<const SpdMatrix> set);

struct IterativeMeanResult {
  SpdMatrix mean;
  bool converged = false;
  int iterations = 0;
  /// Frobenius norm of the mean tangent vector at `mean`.
  double gradient_norm = 0.0;
};

/// Karcher-mean fixed point G <- G^1/2 exp(mean_k log(G^-1/2 R_k G^-1/2)) G^1/2,
/// started from the log-Euclidean mean. On non-convergence the best iterate
/// (smallest gradient norm) is returned with converged = false.
IterativeMeanResult riemannian_mean_iterative(std::span<const SpdMatrix> set,
                                              double tol = 1e-8, int max_iter = 50);

/// log(ref^-1/2 R ref^-1/2).
SymmetricMatrix tangent_map(const SpdMatrix& reference, const SpdMatrix& r);

/// Lower triangle in column-major order; off-diagonal entries scaled by sqrt(2)
/// so that the Euclidean norm equals the Frobenius norm of the input.
Eigen::VectorXd half_vectorize(const SymmetricMatrix& t);

/// Inverse of half_vectorize. Throws InvalidInput if the length is not C(C+1)/2.
SymmetricMatrix unhalf_vectorize(const Eigen::VectorXd& v);

inline Eigen::Index half_vector_length(Eigen::Index dim) { return dim * (dim + 1) / 2; }

/// Tangent space at a fixed reference point; caches the whitening factor so
/// that mapping many matrices costs one eigendecomposition each.
class TangentSpace {
 public:
  explicit TangentSpace(const SpdMatrix& reference);

  const SpdMatrix& reference() const { return reference_; }
  SymmetricMatrix map(const SpdMatrix& r) const;
  Eigen::VectorXd features(const SpdMatrix& r) const { return half_vectorize(map(r)); }

 private:
  SpdMatrix reference_;
  Eigen::MatrixXd whitening_;
};

}  // namespace rgc
