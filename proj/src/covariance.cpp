#include "rgc/covariance.hpp"

#include "rgc/error.hpp"

#include <algorithm>
#include <string>

namespace rgc {

namespace {

void check_samples(const Eigen::MatrixXd& x) {
  if (x.cols() < 2) {
    throw InvalidInput("covariance needs at least 2 samples, got " + std::to_string(x.cols()));
  }
  if (x.rows() < 1) throw InvalidInput("covariance needs at least 1 channel");
  if (!x.allFinite()) throw InvalidInput("covariance input has non-finite entries");
}

}  // namespace

SymmetricMatrix sample_covariance(const Eigen::MatrixXd& x) {
  check_samples(x);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(x.rows(), x.rows());
  s.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(x.cols() - 1));
  return SymmetricMatrix(Eigen::MatrixXd(s.selfadjointView<Eigen::Lower>()));
}

ShrinkageResult shrinkage_covariance(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd s = sample_covariance(x).matrix();
  const auto c = static_cast<double>(x.rows());
  const auto t = static_cast<double>(x.cols());

  const double nu = s.trace() / c;
  Eigen::MatrixXd centered_target = s;
  centered_target.diagonal().array() -= nu;
  const double d2 = centered_target.squaredNorm() / c;

  // sum_t ||x_t x_t^T - S||_F^2 = sum_t |x_t|^4 - 2 sum_t x_t^T S x_t + T ||S||_F^2
  const Eigen::ArrayXd sq_norms = x.colwise().squaredNorm().transpose().array();
  const double quartic = sq_norms.square().sum();
  const double cross = (s * x).cwiseProduct(x).sum();
  const double spread = std::max(0.0, quartic - 2.0 * cross + t * s.squaredNorm());
  const double b2 = std::min(d2, spread / (t * t * c));

  const double rho = d2 > 0.0 ? b2 / d2 : 0.0;
  Eigen::MatrixXd shrunk = (1.0 - rho) * s;
  shrunk.diagonal().array() += rho * nu;
  return ShrinkageResult{SpdMatrix::from_trusted(shrunk), rho, nu};
}

}  // namespace rgc
