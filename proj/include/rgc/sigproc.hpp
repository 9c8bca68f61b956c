#pragma once

// EEG front-end: Butterworth bandpass, decimation, segmentation and
// decision-window splitting.

#include "rgc/covariance.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace rgc {

/// Normalized second-order section, a0 == 1.
struct Biquad {
  double b0 = 0, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

struct BandpassFilter {
  int order = 0;
  double low_hz = 0;
  double high_hz = 0;
  double fs = 0;
  std::vector<Biquad> sections;

  /// H(e^{j 2 pi f / fs}) of the full cascade.
  std::complex<double> response(double f_hz) const;
  double magnitude_db(double f_hz) const;
  /// Roots of every section denominator.
  std::vector<std::complex<double>> poles() const;
};

/// Digital Butterworth bandpass of total order `order` (order/2 prototype
/// poles) built from the analog prototype by lowpass-to-bandpass transform and
/// bilinear transform with prewarped band edges. Gain is normalized to unity
/// at the digital image of the analog center frequency.
BandpassFilter design_butterworth_bandpass(int order, double low_hz, double high_hz, double fs);

/// Half-open sample interval [start, end) carrying one attention label.
struct TrialInterval {
  std::size_t start = 0;
  std::size_t end = 0;
  Label label = Label::Unlabeled;
};

struct Recording {
  std::string subject_id;
  Eigen::MatrixXd data;  ///< channels x samples
  double fs = 0;
  std::vector<TrialInterval> trials;

  Eigen::Index channels() const { return data.rows(); }
  Eigen::Index samples() const { return data.cols(); }

  /// Throws InvalidInput unless trials are labeled, sorted, in range and
  /// non-overlapping and the data are finite. Samples outside every trial are
  /// unlabeled and never enter a segment.
  void validate() const;
};

/// Causal direct-form-II-transposed filtering of every channel, zero initial state.
Recording filter_forward(const BandpassFilter& filter, const Recording& x);

/// Keeps every (fs/target_fs)-th sample starting at index 0. Trial bounds are
/// mapped to the first retained sample at or after each bound.
Recording downsample(const Recording& x, double target_fs);

/// Number of samples spanned by `seconds` at `fs` (floored, tolerant to
/// representation error such as 0.53125 * 64).
std::size_t samples_for(double seconds, double fs);

/// Removes each channel's mean and scales to unit Frobenius norm.
/// Throws DegenerateSegment when nothing is left after centering.
void normalize_segment(Eigen::MatrixXd& block);

struct SegmentationResult {
  std::vector<EegSegment> segments;
  std::vector<std::string> warnings;
};

/// Cuts consecutive non-overlapping segments of `segment_s` seconds from the
/// start of each trial (so no segment crosses a label boundary), drops each
/// trial's remainder, and normalizes every segment. Degenerate segments are
/// skipped and reported in `warnings`. Segment ids start at `first_id`.
SegmentationResult segment_and_normalize(const Recording& x, double segment_s,
                                         std::size_t first_id = 0);

/// floor(T_seg / T_win) consecutive windows; remainder dropped; label and
/// segment id inherited.
std::vector<EegSegment> split_windows(const EegSegment& segment, double window_s);

}  // namespace rgc
