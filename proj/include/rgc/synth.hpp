#pragma once

// Synthetic multichannel recordings with class-dependent spatial covariance,
// a desk-scale stand-in for real two-speaker attention data.

#include "rgc/sigproc.hpp"

#include <cstdint>
#include <vector>

namespace rgc {

struct SynthSpec {
  int n_subjects = 3;
  int channels = 16;
  double fs = 128.0;
  double minutes = 36.0;
  /// Trials alternate labels +1, -1, +1, ...
  double trial_minutes = 6.0;
  /// Scale of the class-specific low-rank perturbation added to the base covariance.
  double strength = 1.0;
  int perturbation_rank = 2;
  /// Standard deviation of isotropic sensor noise added to the class signal.
  double noise_level = 0.0;
  std::uint64_t seed = 1;
  double band_low_hz = 12.0;
  double band_high_hz = 30.0;
  int filter_order = 8;
};

struct ClassCovariances {
  Eigen::MatrixXd positive;
  Eigen::MatrixXd negative;
};

/// Base = A A^T / C + I with Gaussian A; class k adds strength * U_k U_k^T / C
/// with Gaussian C x rank U_k. Throws InvalidInput if either class matrix is
/// not positive definite.
ClassCovariances synth_class_covariances(const SynthSpec& spec, std::uint64_t subject_seed);

/// One recording per subject, bandpass filtered with the configured
/// Butterworth design. Deterministic in `spec.seed`.
std::vector<Recording> generate_synthetic(const SynthSpec& spec);

}  // namespace rgc
