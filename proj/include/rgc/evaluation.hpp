#pragma once

// Evaluation protocol: ten-fold cross-validation over decision-window
// lengths, binomial significance thresholds and the minimal expected switch
// duration (MESD) under a simplified birth-death gain-control model.

#include "rgc/classifiers.hpp"
#include "rgc/covariance.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rgc {

enum class Method { Rgc, Csp };

std::string to_string(Method m);
/// Accepts "RGC"/"CSP" in any case. Throws InvalidInput otherwise.
Method parse_method(const std::string& s);

struct CurveEntry {
  double window_s = 0.0;
  double accuracy = 0.0;
  long n_decisions = 0;
  long n_correct = 0;
};

/// Accuracies per decision-window length, sorted by decreasing window length.
struct AccuracyCurve {
  std::string subject_id;
  Method method = Method::Rgc;
  std::vector<CurveEntry> entries;
};

struct CvOptions {
  int folds = 10;
  RgcOptions rgc;
  /// Replace rgc.svm_c by an inner grid search per training fold.
  bool svm_grid_search = false;
  std::vector<double> svm_grid{0.01, 0.1, 1.0, 10.0};
  int csp_filters = 6;
  /// Observer invoked once per (window length, fold) with the segment ids used
  /// for training and testing.
  std::function<void(double window_s, int fold, const std::vector<std::size_t>& train_ids,
                     const std::vector<std::size_t>& test_ids)>
      on_fold;
};

/// Shuffles 0..n-1 with a seeded Fisher-Yates pass (mt19937_64) and deals the
/// shuffled order round-robin into `folds` folds. Returns the fold of each index.
std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed);

/// Stratified variant: the same seeded shuffle, after which positives are
/// dealt first and negatives continue the round-robin. Fold sizes still
/// differ by at most one, and so do per-class counts.
std::vector<int> assign_folds(std::span<const Label> labels, int folds, std::uint64_t seed);

/// Subject-specific cross-validation at 60 s segment granularity, with
/// stratified fold assignment. For every
/// window length the model is retrained on windows cut from the training
/// folds' segments and tested on windows of the held-out fold; accuracy is
/// pooled over folds. If some fold's training part lacks a class the
/// assignment is redrawn once with seed + 1, then ProtocolError is thrown.
AccuracyCurve ten_fold_cv(std::span<const EegSegment> segments,
                          std::span<const double> window_lengths_s, Method method,
                          std::uint64_t seed, const CvOptions& options = {},
                          const std::string& subject_id = {});

/// Smallest k/n with P[Binomial(n, 1/2) >= k] < alpha; nullopt if even k = n
/// does not reach significance.
std::optional<double> significance_threshold(long n_decisions, double alpha);

/// Expected number of steps for a walk on {0..n_states-1} moving up with
/// probability p and down with 1 - p (staying put at 0) to first reach
/// `to_state` from `from_state`.
double expected_hitting_time(double p, int from_state, int to_state, int n_states);

struct MesdConstants {
  /// Comfort gain level g-bar.
  double comfort = 0.8;
  /// Required stationary probability mass at gains >= comfort.
  double stability_mass = 0.9;
  int min_states = 2;
  int max_states = 100;
};

struct MesdResult {
  double mesd_s = 0.0;
  double optimal_window_s = 0.0;
  int optimal_n_states = 0;
  bool converged = false;
};

/// Smallest state index whose gain i/(K-1) is >= comfort.
int mesd_target_state(int n_states, double comfort);
/// Largest state index whose gain i/(K-1) is <= 1 - comfort.
int mesd_initial_state(int n_states, double comfort);
/// Stationary mass of the reflecting walk on states >= target.
double stationary_mass_from(double p, int n_states, int target);

/// Minimum over window lengths with accuracy > 0.5 and K in
/// [min_states, max_states] of tau * expected_hitting_time(p, initial, target, K),
/// restricted to K whose stationary mass at comfortable gains is at least
/// stability_mass. Throws NoStableDesign if nothing qualifies.
MesdResult mesd(std::span<const CurveEntry> curve, const MesdConstants& constants = {});
inline MesdResult mesd(const AccuracyCurve& curve, const MesdConstants& constants = {}) {
  return mesd(curve.entries, constants);
}

}  // namespace rgc
