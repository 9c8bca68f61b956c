#include "rgc/evaluation.hpp"

#include "rgc/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rgc {

namespace {

constexpr double kGridTolerance = 1e-9;

}  // namespace

double expected_hitting_time(double p, int from_state, int to_state, int n_states) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidInput("step-up probability must lie in (0, 1]");
  if (from_state < 0 || from_state >= to_state || to_state >= n_states) {
    std::ostringstream os;
    os << "hitting time needs 0 <= from < to < n_states, got from=" << from_state
       << " to=" << to_state << " n_states=" << n_states;
    throw InvalidInput(os.str());
  }
  // h_k: expected steps to go from k to k + 1.
  double h = 1.0 / p;
  double total = 0.0;
  for (int k = 0; k < to_state; ++k) {
    if (k > 0) h = (1.0 + (1.0 - p) * h) / p;
    if (k >= from_state) total += h;
  }
  return total;
}

int mesd_target_state(int n_states, double comfort) {
  const double span = n_states - 1;
  return static_cast<int>(std::ceil(comfort * span - kGridTolerance));
}

int mesd_initial_state(int n_states, double comfort) {
  const double span = n_states - 1;
  return static_cast<int>(std::floor((1.0 - comfort) * span + kGridTolerance));
}

double stationary_mass_from(double p, int n_states, int target) {
  // pi_i ~ (p/(1-p))^i; written in powers of s = (1-p)/p counted from the
  // top state so that every term is <= 1 when p > 1/2.
  const double s = (1.0 - p) / p;
  double top = 0.0;
  double all = 0.0;
  double term = 1.0;
  for (int m = 0; m < n_states; ++m) {
    if (m <= n_states - 1 - target) top += term;
    all += term;
    term *= s;
  }
  return top / all;
}

MesdResult mesd(std::span<const CurveEntry> curve, const MesdConstants& constants) {
  if (curve.empty()) throw InvalidInput("MESD of an empty accuracy curve");
  if (constants.min_states < 2 || constants.max_states < constants.min_states) {
    throw InvalidInput("MESD state range is invalid");
  }

  MesdResult best;
  best.mesd_s = std::numeric_limits<double>::infinity();
  for (const auto& e : curve) {
    const double p = e.accuracy;
    if (!(p > 0.5)) continue;
    for (int k = constants.min_states; k <= constants.max_states; ++k) {
      const int target = mesd_target_state(k, constants.comfort);
      const int initial = mesd_initial_state(k, constants.comfort);
      if (initial >= target) continue;
      if (stationary_mass_from(p, k, target) < constants.stability_mass) continue;
      const double duration = e.window_s * expected_hitting_time(p, initial, target, k);
      if (duration < best.mesd_s) {
        best = MesdResult{duration, e.window_s, k, true};
      }
    }
  }
  if (!best.converged) {
    throw NoStableDesign("no window length and state count satisfy the stability constraint");
  }
  return best;
}

}  // namespace rgc
