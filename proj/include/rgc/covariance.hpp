#pragma once

#include "rgc/spd.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace rgc {

enum class Label : int { Negative = -1, Unlabeled = 0, Positive = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }

/// A C x T block of EEG with its sampling rate, class label and the id of the
/// 60 s segment it was cut from (windows inherit their parent's id).
struct EegSegment {
  Eigen::MatrixXd data;
  double fs = 0.0;
  Label label = Label::Unlabeled;
  std::size_t segment_id = 0;

  Eigen::Index channels() const { return data.rows(); }
  Eigen::Index samples() const { return data.cols(); }
  double duration_s() const { return static_cast<double>(samples()) / fs; }
};

struct ShrinkageResult {
  /// Positive definite whenever intensity > 0 and the data are not all zero.
  SpdMatrix covariance;
  /// Convex weight rho on the scaled-identity target, in [0, 1].
  double intensity = 0.0;
  /// nu = trace(S) / C.
  double target_scale = 0.0;

  /// Equivalent additive ridge constant rho * nu.
  double ridge() const { return intensity * target_scale; }
};

/// (1/(T-1)) X X^T without mean removal. Throws InvalidInput if T < 2.
SymmetricMatrix sample_covariance(const Eigen::MatrixXd& x);
inline SymmetricMatrix sample_covariance(const EegSegment& s) { return sample_covariance(s.data); }

/// Ledoit-Wolf shrinkage towards nu*I:
///   Sigma = rho nu I + (1 - rho) S,
///   d^2  = ||S - nu I||_F^2 / C,
///   b^2  = min(d^2, (1/(T^2 C)) sum_t ||x_t x_t^T - S||_F^2),
///   rho  = b^2 / d^2  (0 when d^2 = 0).
/// Columns of `x` are the observations x_t.
ShrinkageResult shrinkage_covariance(const Eigen::MatrixXd& x);
inline ShrinkageResult shrinkage_covariance(const EegSegment& s) {
  return shrinkage_covariance(s.data);
}

}  // namespace rgc
