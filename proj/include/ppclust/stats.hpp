#ifndef PPCLUST_STATS_HPP
#define PPCLUST_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "core.hpp"

namespace ppclust {

/// Monte Carlo estimate with its standard error.
struct EstimateWithError {
  double value = 0;
  double std_error = 0;
  std::size_t replications = 0;
};

/// An estimated curve over an increasing abscissa (typically radii).
struct CurveEstimate {
  std::vector<double> abscissa;
  std::vector<EstimateWithError> estimates;
};

/// Pairwise (cascade) summation; fixed reduction tree for a given length.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean_of(std::span<const double> xs) {
  return xs.empty() ? 0.0 : pairwise_sum(xs) / static_cast<double>(xs.size());
}

/// Mean of independent replicate values with SE = sd / sqrt(n).
inline EstimateWithError summarize(std::span<const double> xs) {
  EstimateWithError e;
  e.replications = xs.size();
  if (xs.empty()) return e;
  e.value = mean_of(xs);
  if (xs.size() > 1) {
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - e.value) * (xs[i] - e.value);
    const double var = pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
    e.std_error = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return e;
}

/// Binomial standard error of a proportion estimated from n trials.
inline double binomial_se(double p, std::size_t n) {
  if (n == 0) return 0;
  return std::sqrt(std::max(0.0, p * (1 - p)) / static_cast<double>(n));
}

/// Two-sample z-score; 0 when both errors vanish and the values agree.
inline double two_sample_z(const EstimateWithError& a, const EstimateWithError& b) {
  const double se = std::hypot(a.std_error, b.std_error);
  const double diff = a.value - b.value;
  if (se > 0) return diff / se;
  if (diff == 0) return 0;
  return diff > 0 ? INFINITY : -INFINITY;
}

}  // namespace ppclust

#endif  // PPCLUST_STATS_HPP
