#include "rgc/synth.hpp"

#include "rgc/error.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace rgc {

namespace {

std::uint64_t subject_seed(std::uint64_t seed, int subject) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(subject)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n01(rng);
  return m;
}

void check_spec(const SynthSpec& s) {
  std::ostringstream os;
  if (s.n_subjects < 1) os << "n_subjects must be >= 1; ";
  if (s.channels < 2) os << "channels must be >= 2; ";
  if (!(s.fs > 0.0)) os << "fs must be positive; ";
  if (!(s.minutes > 0.0)) os << "minutes must be positive; ";
  if (!(s.trial_minutes > 0.0)) os << "trial_minutes must be positive; ";
  if (s.perturbation_rank < 1 || s.perturbation_rank > s.channels) {
    os << "perturbation_rank must lie in [1, channels]; ";
  }
  if (!(s.noise_level >= 0.0)) os << "noise_level must be >= 0; ";
  if (!os.str().empty()) throw InvalidInput("synthetic spec: " + os.str());
}

}  // namespace

ClassCovariances synth_class_covariances(const SynthSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  std::mt19937_64 rng(seed);
  const Eigen::Index c = spec.channels;
  const Eigen::MatrixXd a = gaussian(rng, c, c);
  const Eigen::MatrixXd base = a * a.transpose() / static_cast<double>(c) +
                               Eigen::MatrixXd::Identity(c, c);
  const Eigen::MatrixXd up = gaussian(rng, c, spec.perturbation_rank);
  const Eigen::MatrixXd un = gaussian(rng, c, spec.perturbation_rank);
  ClassCovariances out{base + spec.strength * up * up.transpose() / static_cast<double>(c),
                       base + spec.strength * un * un.transpose() / static_cast<double>(c)};
  for (const auto* m : {&out.positive, &out.negative}) {
    if (Eigen::LLT<Eigen::MatrixXd>(*m).info() != Eigen::Success) {
      throw InvalidInput("synthetic class covariance is not positive definite (strength too negative)");
    }
  }
  return out;
}

std::vector<Recording> generate_synthetic(const SynthSpec& spec) {
  check_spec(spec);
  const BandpassFilter filter =
      design_butterworth_bandpass(spec.filter_order, spec.band_low_hz, spec.band_high_hz, spec.fs);
  const auto total = static_cast<Eigen::Index>(std::llround(spec.minutes * 60.0 * spec.fs));
  const auto trial_len =
      std::max<Eigen::Index>(1, std::llround(spec.trial_minutes * 60.0 * spec.fs));
  const Eigen::Index c = spec.channels;

  std::vector<Recording> out;
  out.reserve(static_cast<std::size_t>(spec.n_subjects));
  for (int s = 0; s < spec.n_subjects; ++s) {
    const std::uint64_t seed = subject_seed(spec.seed, s);
    const ClassCovariances cov = synth_class_covariances(spec, seed);
    const Eigen::MatrixXd l_pos = Eigen::LLT<Eigen::MatrixXd>(cov.positive).matrixL();
    const Eigen::MatrixXd l_neg = Eigen::LLT<Eigen::MatrixXd>(cov.negative).matrixL();
    std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);

    Recording rec;
    std::ostringstream id;
    id << "synth" << (s + 1);
    rec.subject_id = id.str();
    rec.fs = spec.fs;
    rec.data.resize(c, total);
    Label label = Label::Positive;
    for (Eigen::Index start = 0; start < total; start += trial_len) {
      const Eigen::Index len = std::min(trial_len, total - start);
      const Eigen::MatrixXd& l = label == Label::Positive ? l_pos : l_neg;
      Eigen::MatrixXd block = l * gaussian(rng, c, len);
      if (spec.noise_level > 0.0) block += spec.noise_level * gaussian(rng, c, len);
      rec.data.middleCols(start, len) = block;
      rec.trials.push_back(TrialInterval{static_cast<std::size_t>(start),
                                         static_cast<std::size_t>(start + len), label});
      label = label == Label::Positive ? Label::Negative : Label::Positive;
    }
    out.push_back(filter_forward(filter, rec));
  }
  return out;
}

}  // namespace rgc
