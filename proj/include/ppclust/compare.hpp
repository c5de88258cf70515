#ifndef PPCLUST_COMPARE_HPP
#define PPCLUST_COMPARE_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "format.hpp"
#include "procgen.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "summaries.hpp"

namespace ppclust {

enum class Statistic { voids, factorial_moments, ripley_k, variance };

/// Consistency band and violation gate, in standard errors.
inline constexpr double kConsistentZ = 2.0;
inline constexpr double kViolationZ = 4.0;
inline constexpr std::size_t kDefaultPlacements = 64;

struct ScaleRow {
  double scale = 0;
  double estimate = 0;
  double std_error = 0;
  double reference = 0;
  double z_score = 0;
};

struct Verdict {
  enum class Kind { consistent_sub, consistent_super, inconclusive, violated };
  Kind kind = Kind::inconclusive;
  std::optional<double> scale;  ///< set for violated

  bool operator==(const Verdict&) const = default;
};

struct OrderingReport {
  Statistic statistic = Statistic::voids;
  int k = 0;  ///< moment order for factorial_moments
  std::vector<ScaleRow> per_scale;
  Verdict verdict;
};

inline std::string to_string(Statistic s, int k = 0) {
  switch (s) {
    case Statistic::voids: return "voids";
    case Statistic::factorial_moments: return "factorial_moments(" + std::to_string(k) + ")";
    case Statistic::ripley_k: return "ripley_k";
    case Statistic::variance: return "variance";
  }
  return "?";
}

inline std::string to_string(const Verdict& v) {
  switch (v.kind) {
    case Verdict::Kind::consistent_sub: return "consistent_sub";
    case Verdict::Kind::consistent_super: return "consistent_super";
    case Verdict::Kind::inconclusive: return "inconclusive";
    case Verdict::Kind::violated: return "violated(" + format_real(v.scale.value_or(0)) + ")";
  }
  return "?";
}

/// Verdict from scale-wise z-scores. z > 0 means the estimate exceeds the
/// reference (super-Poisson side). Consistency uses the 2-sigma band; with
/// mixed signs the minority direction is a violation once it passes 4 sigma.
/// The rule is symmetric under z -> -z with sub and super exchanged.
inline Verdict verdict_from(std::span<const ScaleRow> rows) {
  bool above = false, below = false;
  double sum = 0;
  for (const auto& r : rows) {
    above |= r.z_score > kConsistentZ;
    below |= r.z_score < -kConsistentZ;
    if (std::isfinite(r.z_score)) sum += r.z_score;
    else sum += r.z_score > 0 ? 1e300 : -1e300;
  }
  if (!above && !below) return {Verdict::Kind::inconclusive, {}};
  if (!above) return {Verdict::Kind::consistent_sub, {}};
  if (!below) return {Verdict::Kind::consistent_super, {}};
  for (const auto& r : rows) {
    const bool minority = sum > 0 ? r.z_score < -kViolationZ
                        : sum < 0 ? r.z_score > kViolationZ
                                  : std::abs(r.z_score) > kViolationZ;
    if (minority) return {Verdict::Kind::violated, r.scale};
  }
  return {Verdict::Kind::inconclusive, {}};
}

namespace detail {

/// Var of (N)_k for N ~ Poisson(mu): sum_{j>=1} C(k,j)^2 j! mu^(2k-j).
inline double poisson_falling_factorial_variance(double mu, int k) {
  double v = 0, binom = 1, fact = 1;
  for (int j = 1; j <= k; ++j) {
    binom = binom * (k - j + 1) / j;
    fact *= j;
    v += binom * binom * fact * std::pow(mu, 2 * k - j);
  }
  return v;
}

inline double z_against(double estimate, double se, double reference) {
  const double diff = estimate - reference;
  if (se > 0) return diff / se;
  if (diff == 0) return 0;
  return diff > 0 ? INFINITY : -INFINITY;
}

inline std::vector<Region> boxes(std::span<const double> scales) {
  std::vector<Region> out;
  for (double s : scales) {
    if (!(s > 0)) throw InvalidArgument("scales must be positive");
    out.push_back(Region::box(s));
  }
  return out;
}

}  // namespace detail

/// Compares box void probabilities against exp(-lambda |B|) and factorial
/// moments k = 2..k_max against (lambda |B|)^k at each box side in `scales`.
/// Standard errors are floored at the Poisson sampling error of
/// reps * placements independent boxes so that exact (zero-spread) estimates
/// do not produce infinite z-scores.
inline std::vector<OrderingReport> weak_poisson_test(const GeneratorSpec& spec, const Window& w,
                                                     std::span<const double> scales, int k_max, std::size_t reps,
                                                     const RandomStream& stream,
                                                     std::size_t placements = kDefaultPlacements) {
  if (k_max < 1 || k_max > 4) throw InvalidArgument("weak_poisson_test: k_max must be in [1, 4]");
  if (scales.empty()) throw InvalidArgument("weak_poisson_test: no scales");
  const double lambda = intensity(spec, w.dim()).value;
  const auto regions = detail::boxes(scales);
  const auto counts = region_counts(spec, w, regions, placements, reps, stream);
  const double n_eff = static_cast<double>(reps * placements);

  std::vector<OrderingReport> out;
  OrderingReport voids{Statistic::voids, 0, {}, {}};
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const double mu = lambda * regions[s].volume(w.dim());
    const double ref = std::exp(-mu);
    const auto e = replicate_mean(counts, s, [](std::int64_t n) { return n == 0 ? 1.0 : 0.0; });
    const double se = std::max(e.std_error, std::sqrt(ref * (1 - ref) / n_eff));
    voids.per_scale.push_back({scales[s], e.value, se, ref, detail::z_against(e.value, se, ref)});
  }
  voids.verdict = verdict_from(voids.per_scale);
  out.push_back(std::move(voids));

  for (int k = 2; k <= k_max; ++k) {
    OrderingReport rep{Statistic::factorial_moments, k, {}, {}};
    for (std::size_t s = 0; s < scales.size(); ++s) {
      const double mu = lambda * regions[s].volume(w.dim());
      const double ref = std::pow(mu, k);
      const auto e = replicate_mean(counts, s, [k](std::int64_t n) { return detail::falling_factorial(n, k); });
      const double se =
          std::max(e.std_error, std::sqrt(detail::poisson_falling_factorial_variance(mu, k) / n_eff));
      rep.per_scale.push_back({scales[s], e.value, se, ref, detail::z_against(e.value, se, ref)});
    }
    rep.verdict = verdict_from(rep.per_scale);
    out.push_back(std::move(rep));
  }
  return out;
}

inline constexpr double kIntensityMatchTolerance = 0.01;

/// Scale-wise two-sample comparison of A against B; `reference` holds B's
/// estimate and z = (A - B) / sqrt(se_A^2 + se_B^2). consistent_sub reads
/// "A is below B". Scales are box sides (voids, moments, variance) or radii
/// (ripley_k). A and B use independent sub-streams.
inline OrderingReport compare_two(const GeneratorSpec& a, const GeneratorSpec& b, const Window& w, Statistic statistic,
                                  std::span<const double> scales, std::size_t reps, const RandomStream& stream,
                                  int k = 2, std::size_t placements = kDefaultPlacements) {
  const double la = intensity(a, w.dim()).value, lb = intensity(b, w.dim()).value;
  if (!(std::abs(la - lb) <= kIntensityMatchTolerance * std::max(la, lb)))
    throw InvalidArgument("compare_two: intensities differ by more than 1%");
  if (scales.empty()) throw InvalidArgument("compare_two: no scales");
  const RandomStream sa = stream.derive(0), sb = stream.derive(1);

  std::vector<EstimateWithError> ea, eb;
  switch (statistic) {
    case Statistic::ripley_k: {
      ea = ripley_k(a, w, scales, reps, sa).estimates;
      eb = ripley_k(b, w, scales, reps, sb).estimates;
      break;
    }
    case Statistic::voids:
    case Statistic::factorial_moments:
    case Statistic::variance: {
      if (statistic == Statistic::factorial_moments && (k < 1 || k > 4))
        throw InvalidArgument("compare_two: k must be in [1, 4]");
      const auto regions = detail::boxes(scales);
      const auto ca = region_counts(a, w, regions, placements, reps, sa);
      const auto cb = region_counts(b, w, regions, placements, reps, sb);
      for (std::size_t s = 0; s < scales.size(); ++s) {
        if (statistic == Statistic::variance) {
          ea.push_back(count_variance_from(ca, s));
          eb.push_back(count_variance_from(cb, s));
        } else if (statistic == Statistic::voids) {
          auto g = [](std::int64_t n) { return n == 0 ? 1.0 : 0.0; };
          ea.push_back(replicate_mean(ca, s, g));
          eb.push_back(replicate_mean(cb, s, g));
        } else {
          auto g = [k](std::int64_t n) { return detail::falling_factorial(n, k); };
          ea.push_back(replicate_mean(ca, s, g));
          eb.push_back(replicate_mean(cb, s, g));
        }
      }
      break;
    }
  }

  OrderingReport rep{statistic, statistic == Statistic::factorial_moments ? k : 0, {}, {}};
  for (std::size_t s = 0; s < scales.size(); ++s)
    rep.per_scale.push_back({scales[s], ea[s].value, std::hypot(ea[s].std_error, eb[s].std_error), eb[s].value,
                             two_sample_z(ea[s], eb[s])});
  rep.verdict = verdict_from(rep.per_scale);
  return rep;
}

struct ConcentrationRow {
  std::int64_t n = 0;
  double empirical = 0;
  double std_error = 0;
  double bound = 0;
  bool skipped = false;  ///< power guard: reps < 10 / bound
  bool holds = true;
};

inline constexpr double kUnitIntensityTolerance = 0.01;

/// Tail frequency of |Phi(B_n) - n| >= n^a for the cube B_n of volume n,
/// against 2 exp(-n^(2a-1) / 9). Each replication samples the process on a
/// periodic cube of integer side ceil(n^(1/d)) + 2 and counts one randomly
/// placed B_n.
inline std::vector<ConcentrationRow> concentration_check(const GeneratorSpec& spec, double a,
                                                         std::span<const std::int64_t> n_list, std::size_t reps,
                                                         const RandomStream& stream, std::size_t dim = 2) {
  if (!(a > 0.5 && a < 1)) throw InvalidArgument("concentration_check: a must lie in (0.5, 1)");
  if (reps < 1) throw InvalidArgument("concentration_check: reps must be >= 1");
  const double lambda = intensity(spec, dim).value;
  if (!(std::abs(lambda - 1) <= kUnitIntensityTolerance))
    throw InvalidArgument("concentration_check: the process must have unit intensity");
  std::vector<ConcentrationRow> out;
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    const std::int64_t n = n_list[idx];
    if (n < 16) throw InvalidArgument("concentration_check: n must be >= 16");
    ConcentrationRow row;
    row.n = n;
    const double nd = static_cast<double>(n);
    row.bound = 2 * std::exp(-std::pow(nd, 2 * a - 1) / 9);
    if (static_cast<double>(reps) < 10 / row.bound) {
      row.skipped = true;
      out.push_back(row);
      continue;
    }
    const double side = std::pow(nd, 1.0 / static_cast<double>(dim));
    const Window w = Window::cube(dim, std::ceil(side) + 2, Metric::periodic);
    const Region regions[] = {Region::box(side)};
    const auto counts = region_counts(spec, w, regions, 1, reps, stream.derive(idx));
    const double dev = std::pow(nd, a);
    std::size_t hits = 0;
    for (const auto& rep : counts) hits += std::abs(static_cast<double>(rep[0][0]) - nd) >= dev;
    row.empirical = static_cast<double>(hits) / static_cast<double>(reps);
    row.std_error = binomial_se(row.empirical, reps);
    row.holds = row.empirical <= row.bound + 3 * row.std_error;
    out.push_back(row);
  }
  return out;
}

}  // namespace ppclust

#endif  // PPCLUST_COMPARE_HPP
