#include "rgc/sigproc.hpp"

#include "rgc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rgc {

namespace {

using cd = std::complex<double>;

std::complex<double> section_response(const Biquad& s, cd z_inv) {
  const cd num = s.b0 + z_inv * (s.b1 + z_inv * s.b2);
  const cd den = 1.0 + z_inv * (s.a1 + z_inv * s.a2);
  return num / den;
}

Biquad section_from_poles(cd p1, cd p2) {
  Biquad s;
  s.b0 = 1.0;
  s.b1 = 0.0;
  s.b2 = -1.0;
  s.a1 = -(p1 + p2).real();
  s.a2 = (p1 * p2).real();
  return s;
}

}  // namespace

std::complex<double> BandpassFilter::response(double f_hz) const {
  const cd z_inv = std::polar(1.0, -2.0 * std::numbers::pi * f_hz / fs);
  cd h = 1.0;
  for (const auto& s : sections) h *= section_response(s, z_inv);
  return h;
}

double BandpassFilter::magnitude_db(double f_hz) const {
  return 20.0 * std::log10(std::abs(response(f_hz)));
}

std::vector<std::complex<double>> BandpassFilter::poles() const {
  std::vector<cd> out;
  for (const auto& s : sections) {
    // z^2 + a1 z + a2 = 0
    const cd disc = std::sqrt(cd(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    out.push_back((-s.a1 + disc) / 2.0);
    out.push_back((-s.a1 - disc) / 2.0);
  }
  return out;
}

BandpassFilter design_butterworth_bandpass(int order, double low_hz, double high_hz, double fs) {
  if (order < 2 || order % 2 != 0) {
    throw InvalidInput("bandpass order must be a positive even integer");
  }
  if (!(fs > 0.0) || !(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < fs / 2.0)) {
    std::ostringstream os;
    os << "bandpass edges must satisfy 0 < low < high < fs/2 (low=" << low_hz
       << ", high=" << high_hz << ", fs=" << fs << ")";
    throw InvalidInput(os.str());
  }

  const int n = order / 2;
  const double pi = std::numbers::pi;
  const double k = 2.0 * fs;
  const double w1 = k * std::tan(pi * low_hz / fs);
  const double w2 = k * std::tan(pi * high_hz / fs);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  std::vector<cd> upper;
  std::vector<cd> real;
  for (int i = 1; i <= n; ++i) {
    const cd proto = std::polar(1.0, pi * (2.0 * i + n - 1.0) / (2.0 * n));
    const cd half = proto * bw / 2.0;
    const cd root = std::sqrt(half * half - w0 * w0);
    for (const cd s : {half + root, half - root}) {
      const cd z = (k + s) / (k - s);
      if (std::abs(z.imag()) < 1e-12) {
        real.push_back(cd(z.real(), 0.0));
      } else if (z.imag() > 0.0) {
        upper.push_back(z);
      }
    }
  }
  if (real.size() % 2 != 0 || upper.size() + real.size() / 2 != static_cast<std::size_t>(n)) {
    throw NumericalFailure("bandpass design produced an unpaired pole set");
  }

  BandpassFilter f{order, low_hz, high_hz, fs, {}};
  for (const cd p : upper) f.sections.push_back(section_from_poles(p, std::conj(p)));
  std::sort(real.begin(), real.end(), [](cd a, cd b) { return a.real() < b.real(); });
  for (std::size_t i = 0; i < real.size(); i += 2) {
    f.sections.push_back(section_from_poles(real[i], real[i + 1]));
  }

  const double center_hz = fs / pi * std::atan(w0 / k);
  const double gain = 1.0 / std::abs(f.response(center_hz));
  const double per_section = std::pow(gain, 1.0 / static_cast<double>(f.sections.size()));
  for (auto& s : f.sections) {
    s.b0 *= per_section;
    s.b1 *= per_section;
    s.b2 *= per_section;
  }
  return f;
}

void Recording::validate() const {
  if (data.rows() < 1 || data.cols() < 1) throw InvalidInput("recording is empty");
  if (!(fs > 0.0)) throw InvalidInput("recording sampling rate must be positive");
  if (!data.allFinite()) throw InvalidInput("recording contains non-finite samples");
  std::size_t prev_end = 0;
  for (const auto& t : trials) {
    if (t.label == Label::Unlabeled) throw InvalidInput("trial without a label");
    if (t.start >= t.end) throw InvalidInput("trial interval is empty");
    if (t.end > static_cast<std::size_t>(data.cols())) {
      throw InvalidInput("trial interval exceeds recording length");
    }
    if (t.start < prev_end) throw InvalidInput("trial intervals overlap or are unsorted");
    prev_end = t.end;
  }
}

Recording filter_forward(const BandpassFilter& filter, const Recording& x) {
  if (std::abs(filter.fs - x.fs) > 1e-9 * x.fs) {
    std::ostringstream os;
    os << "filter designed for " << filter.fs << " Hz applied to a " << x.fs << " Hz recording";
    throw InvalidInput(os.str());
  }
  Recording out = x;
  const Eigen::Index n = x.samples();
  Eigen::VectorXd buf(n);
  for (Eigen::Index c = 0; c < x.channels(); ++c) {
    buf = x.data.row(c).transpose();
    for (const auto& s : filter.sections) {
      double z1 = 0.0;
      double z2 = 0.0;
      for (Eigen::Index t = 0; t < n; ++t) {
        const double in = buf(t);
        const double y = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * y + z2;
        z2 = s.b2 * in - s.a2 * y;
        buf(t) = y;
      }
    }
    out.data.row(c) = buf.transpose();
  }
  return out;
}

Recording downsample(const Recording& x, double target_fs) {
  if (!(target_fs > 0.0)) throw InvalidInput("target rate must be positive");
  const double ratio = x.fs / target_fs;
  const auto factor = static_cast<Eigen::Index>(std::llround(ratio));
  if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9 * ratio) {
    std::ostringstream os;
    os << "cannot decimate " << x.fs << " Hz to " << target_fs << " Hz: non-integer ratio";
    throw InvalidInput(os.str());
  }
  if (factor == 1) return x;

  Recording out;
  out.subject_id = x.subject_id;
  out.fs = target_fs;
  const Eigen::Index kept = (x.samples() + factor - 1) / factor;
  out.data.resize(x.channels(), kept);
  for (Eigen::Index t = 0; t < kept; ++t) out.data.col(t) = x.data.col(t * factor);

  const auto f = static_cast<std::size_t>(factor);
  for (const auto& t : x.trials) {
    TrialInterval mapped{(t.start + f - 1) / f, (t.end + f - 1) / f, t.label};
    if (mapped.start < mapped.end) out.trials.push_back(mapped);
  }
  return out;
}

std::size_t samples_for(double seconds, double fs) {
  if (!(seconds > 0.0) || !(fs > 0.0)) throw InvalidInput("durations and rates must be positive");
  return static_cast<std::size_t>(std::floor(seconds * fs + 1e-9));
}

void normalize_segment(Eigen::MatrixXd& block) {
  block.colwise() -= block.rowwise().mean();
  const double norm = block.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateSegment("segment has zero energy after mean removal");
  }
  block /= norm;
}

SegmentationResult segment_and_normalize(const Recording& x, double segment_s,
                                         std::size_t first_id) {
  x.validate();
  const std::size_t len = samples_for(segment_s, x.fs);
  if (len < 2) throw InvalidInput("segment length shorter than 2 samples");
  if (static_cast<std::size_t>(x.samples()) < len) {
    std::ostringstream os;
    os << "recording of " << x.samples() << " samples is shorter than one " << segment_s
       << " s segment";
    throw InvalidInput(os.str());
  }

  SegmentationResult result;
  std::size_t id = first_id;
  for (const auto& trial : x.trials) {
    for (std::size_t start = trial.start; start + len <= trial.end; start += len) {
      Eigen::MatrixXd block = x.data.middleCols(static_cast<Eigen::Index>(start),
                                                static_cast<Eigen::Index>(len));
      const std::size_t this_id = id++;
      try {
        normalize_segment(block);
      } catch (const DegenerateSegment& e) {
        std::ostringstream os;
        os << "subject " << x.subject_id << ": skipped segment at sample " << start << ": "
           << e.what();
        result.warnings.push_back(os.str());
        continue;
      }
      result.segments.push_back(EegSegment{std::move(block), x.fs, trial.label, this_id});
    }
  }
  return result;
}

std::vector<EegSegment> split_windows(const EegSegment& segment, double window_s) {
  const std::size_t len = samples_for(window_s, segment.fs);
  const auto total = static_cast<std::size_t>(segment.samples());
  if (len > total) {
    std::ostringstream os;
    os << "window of " << window_s << " s exceeds segment of " << segment.duration_s() << " s";
    throw InvalidInput(os.str());
  }
  if (len < 2) throw InvalidInput("decision window shorter than 2 samples");
  std::vector<EegSegment> out;
  out.reserve(total / len);
  for (std::size_t start = 0; start + len <= total; start += len) {
    out.push_back(EegSegment{segment.data.middleCols(static_cast<Eigen::Index>(start),
                                                     static_cast<Eigen::Index>(len)),
                             segment.fs, segment.label, segment.segment_id});
  }
  return out;
}

}  // namespace rgc
