#pragma once

// End-to-end experiment orchestration and result files.

#include "rgc/classifiers.hpp"
#include "rgc/evaluation.hpp"
#include "rgc/sigproc.hpp"
#include "rgc/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rgc {

struct ExperimentConfig {
  /// Dataset directory; when empty the synthetic spec is used.
  std::string dataset;
  SynthSpec synth;
  std::vector<Method> methods{Method::Rgc, Method::Csp};
  std::vector<double> windows{60.0, 30.0, 20.0, 10.0, 5.0, 2.0, 1.0, 0.53125};
  std::uint64_t seed = 1;
  double band_low = 12.0;
  double band_high = 30.0;
  int filter_order = 8;
  double target_fs = 64.0;
  double segment_s = 60.0;
  /// A positive number, or "grid" for inner 5-fold selection over {0.01, 0.1, 1, 10}.
  std::string svm_c = "1";
  MeanEstimator mean_estimator = MeanEstimator::LogEuclidean;
  double alpha = 0.05;
  int csp_filters = 6;
  /// Negative control: permute segment labels (seeded) before cross-validation.
  bool shuffle_labels = false;
  std::string out = "results";

  /// Throws InvalidInput describing every violated constraint.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Fields absent from `j` keep their defaults. Unknown fields are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

std::string to_string(MeanEstimator m);
MeanEstimator parse_mean_estimator(const std::string& s);

/// Bandpass, decimation to target_fs, then 60 s segmentation and normalization.
SegmentationResult prepare_segments(const Recording& rec, const ExperimentConfig& config);

/// One CSV record.
struct ResultRow {
  std::string subject;
  Method method = Method::Rgc;
  double window_s = 0.0;
  double accuracy = 0.0;
  long n_decisions = 0;
  std::optional<double> significance;
  std::optional<double> mesd_s;
};

inline constexpr const char* kCsvHeader =
    "subject,method,window_len_s,accuracy,n_decisions,significance_threshold,mesd_s";

/// Fixed 6-decimal formatting, "NA" for missing values, one row per line.
std::string format_csv(const std::vector<ResultRow>& rows);
/// Throws FormatError on a malformed header or row.
std::vector<ResultRow> parse_csv(const std::string& text);

/// Linear-interpolation quantile (q in [0, 1]) of a non-empty sample.
double quantile(std::vector<double> values, double q);

/// Per-method medians and [25, 75]% quantiles of MESD and of accuracy per
/// window length, computed across subjects from the rows.
nlohmann::json summarize(const std::vector<ResultRow>& rows, double alpha);

/// Rows for one subject/method curve, with significance thresholds and the
/// curve's MESD repeated on every row.
std::vector<ResultRow> rows_for_curve(const AccuracyCurve& curve, double alpha);

struct SubjectFailure {
  std::string subject;
  std::string error;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<AccuracyCurve> curves;
  std::vector<SubjectFailure> failures;
  std::vector<std::string> warnings;
  std::string csv;
  nlohmann::json summary;
};

/// Runs every subject x method through ten-fold cross-validation. Subjects are
/// independent jobs; a failing subject is recorded and the rest continue.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::vector<Recording>& recordings);

/// Loads the dataset or generates synthetic data per `config`, then runs.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes results.csv, summary.json and config_resolved.json into config.out.
void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace rgc
