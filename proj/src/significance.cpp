#include "rgc/evaluation.hpp"

#include "rgc/error.hpp"

#include <cmath>

namespace rgc {

std::optional<double> significance_threshold(long n_decisions, double alpha) {
  if (n_decisions < 1) throw InvalidInput("significance threshold needs n >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");

  // Upper tail P[X >= k] accumulated from k = n downwards in log space.
  const long double n = static_cast<long double>(n_decisions);
  const long double log_half_n = n * std::log(0.5L);
  const long double log_alpha = std::log(static_cast<long double>(alpha));
  const long double lgn1 = std::lgamma(n + 1.0L);

  long double log_tail = -INFINITY;
  long threshold = -1;
  for (long k = n_decisions; k >= 0; --k) {
    const long double kk = static_cast<long double>(k);
    const long double log_pmf =
        lgn1 - std::lgamma(kk + 1.0L) - std::lgamma(n - kk + 1.0L) + log_half_n;
    const long double hi = std::max(log_tail, log_pmf);
    log_tail = hi + std::log1p(std::exp(std::min(log_tail, log_pmf) - hi));
    if (log_tail < log_alpha) {
      threshold = k;
    } else {
      break;
    }
  }
  if (threshold < 0) return std::nullopt;
  return static_cast<double>(threshold) / static_cast<double>(n_decisions);
}

}  // namespace rgc
