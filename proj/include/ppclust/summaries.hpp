#ifndef PPCLUST_SUMMARIES_HPP
#define PPCLUST_SUMMARIES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "neighbors.hpp"
#include "parallel.hpp"
#include "procgen.hpp"
#include "random.hpp"
#include "stats.hpp"

namespace ppclust {

/// Observation region placed at random centres: a ball of radius `size` or a
/// box of side `size`.
struct Region {
  enum class Kind { ball, box };
  Kind kind = Kind::ball;
  double size = 1;

  static Region ball(double radius) { return {Kind::ball, radius}; }
  static Region box(double side) { return {Kind::box, side}; }

  double volume(std::size_t d) const {
    return kind == Kind::ball ? ball_volume(static_cast<int>(d), size) : std::pow(size, static_cast<double>(d));
  }
  double reach(std::size_t d) const {
    return kind == Kind::ball ? size : size * std::sqrt(static_cast<double>(d)) / 2;
  }
};

inline constexpr double kEmptyReplicationLimit = 0.5;

namespace detail {

inline void require_periodic(const Window& w, const char* who) {
  if (w.metric() != Metric::periodic) throw InvalidArgument(std::string(who) + ": periodic window required");
}

inline void require_radii(std::span<const double> r_grid, const Window& w, const char* who) {
  if (r_grid.empty()) throw InvalidArgument(std::string(who) + ": empty radius grid");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] >= 0)) throw InvalidArgument(std::string(who) + ": radii must be >= 0");
    if (i > 0 && !(r_grid[i] > r_grid[i - 1])) throw InvalidArgument(std::string(who) + ": radii must increase");
  }
  if (!(r_grid.back() < w.min_side() / 2))
    throw InvalidArgument(std::string(who) + ": largest radius must be below half the smallest window side");
}

/// Signed offset x - c along axis i under the window metric.
inline double axis_offset(const Window& w, double x, double c, std::size_t i) {
  double delta = x - c;
  if (w.metric() == Metric::periodic) {
    const double L = w.side(i);
    delta -= L * std::floor(delta / L + 0.5);
  }
  return delta;
}

/// Uniform centre such that the region fits (Euclidean) or anywhere (torus).
inline Point region_centre(const Window& w, const Region& region, Engine& eng) {
  Point c(w.dim());
  const double half = region.size * (region.kind == Region::Kind::box ? 0.5 : 1.0);
  for (std::size_t i = 0; i < w.dim(); ++i) {
    double lo = w.lower()[i], hi = w.upper()[i];
    if (w.metric() == Metric::euclidean) {
      lo += half;
      hi -= half;
      if (!(lo <= hi)) throw InvalidArgument("region does not fit in the window");
    }
    c[i] = lo + uniform01(eng) * (hi - lo);
  }
  return c;
}

inline std::int64_t count_in_region(const CellIndex& index, const PointPattern& p, const Point& centre, const Region& region) {
  std::int64_t n = 0;
  if (region.kind == Region::Kind::ball) {
    index.for_each_within(centre, region.size, [&](std::size_t, double) { ++n; });
    return n;
  }
  const double h = region.size / 2;
  index.for_each_candidate(centre, [&](std::size_t j) {
    const Point& x = p.points[j];
    for (std::size_t i = 0; i < x.dim(); ++i) {
      const double delta = axis_offset(p.window, x[i], centre[i], i);
      if (!(delta >= -h && delta < h)) return;
    }
    ++n;
  });
  return n;
}

/// Region counts for one replication; counts[s][k] is the count of the k-th
/// placement of regions[s]. Placements are shared across scales.
inline std::vector<std::vector<std::int64_t>> replication_region_counts(const GeneratorSpec& spec, const Window& w,
                                                                        std::span<const Region> regions,
                                                                        std::size_t placements, const RandomStream& rep) {
  const PointPattern p = sample(spec, w, rep.derive(0));
  double reach = 0;
  for (const auto& r : regions) reach = std::max(reach, r.reach(w.dim()));
  const CellIndex index(p, reach);
  std::vector<std::vector<std::int64_t>> out(regions.size());
  Engine eng = rep.derive(1).engine();
  for (std::size_t k = 0; k < placements; ++k) {
    for (std::size_t s = 0; s < regions.size(); ++s) {
      const Point c = region_centre(w, regions[s], eng);
      out[s].push_back(count_in_region(index, p, c, regions[s]));
    }
  }
  return out;
}

inline double falling_factorial(std::int64_t n, int k) {
  double v = 1;
  for (int j = 0; j < k; ++j) v *= static_cast<double>(n - j);
  return v;
}

}  // namespace detail

/// Ordered pairs (i != j) within distance r, for each r in the grid.
inline std::vector<double> ordered_pair_counts(const PointPattern& p, std::span<const double> r_grid) {
  std::vector<double> counts(r_grid.size(), 0.0);
  if (p.size() < 2 || r_grid.empty()) return counts;
  const CellIndex index(p, r_grid.back());
  index.for_each_pair_within(r_grid.back(), [&](std::size_t, std::size_t, double d) {
    const auto it = std::lower_bound(r_grid.begin(), r_grid.end(), d);
    if (it != r_grid.end()) counts[static_cast<std::size_t>(it - r_grid.begin())] += 2;
  });
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  return counts;
}

/// K estimate of a single pattern with lambda_hat = n / |W|.
inline std::vector<double> ripley_k(const PointPattern& p, std::span<const double> r_grid) {
  auto c = ordered_pair_counts(p, r_grid);
  if (p.empty()) return c;
  const double vol = volume(p.window);
  const double lam = static_cast<double>(p.size()) / vol;
  for (auto& v : c) v /= lam * lam * vol;
  return c;
}

/// Ripley's K on a periodic window: per replication, ordered pair counts within
/// r divided by lambda_hat^2 |W|, with lambda_hat pooled over replications.
/// Poisson reference: kappa_d r^d.
inline CurveEstimate ripley_k(const GeneratorSpec& spec, const Window& w, std::span<const double> r_grid,
                              std::size_t reps, const RandomStream& stream) {
  detail::require_periodic(w, "ripley_k");
  detail::require_radii(r_grid, w, "ripley_k");
  if (reps < 1) throw InvalidArgument("ripley_k: reps must be >= 1");
  struct Rep {
    std::size_t n = 0;
    std::vector<double> pairs;
  };
  const auto per = parallel_map(reps, [&](std::size_t r) {
    const PointPattern p = sample(spec, w, stream.derive(r));
    return Rep{p.size(), ordered_pair_counts(p, r_grid)};
  });
  std::size_t empty = 0, total = 0;
  for (const auto& rep : per) {
    empty += rep.n == 0;
    total += rep.n;
  }
  if (static_cast<double>(empty) > kEmptyReplicationLimit * static_cast<double>(reps))
    throw Error("ripley_k: more than half of the replications are empty");
  const double vol = volume(w);
  const double lam = static_cast<double>(total) / (static_cast<double>(reps) * vol);
  CurveEstimate out;
  out.abscissa.assign(r_grid.begin(), r_grid.end());
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    std::vector<double> vals;
    for (const auto& rep : per)
      if (rep.n > 0) vals.push_back(rep.pairs[i] / (lam * lam * vol));
    out.estimates.push_back(summarize(vals));
  }
  return out;
}

/// Epanechnikov kernel with half-width b.
inline double epanechnikov(double t, double b) {
  const double u = t / b;
  return std::abs(u) < 1 ? 0.75 / b * (1 - u * u) : 0.0;
}

/// Sum over ordered pairs of k_b(r - |X_i - X_j|) for each r.
inline std::vector<double> kernel_pair_sums(const PointPattern& p, std::span<const double> r_grid, double bandwidth) {
  std::vector<double> sums(r_grid.size(), 0.0);
  if (p.size() < 2 || r_grid.empty()) return sums;
  const double reach = r_grid.back() + bandwidth;
  const CellIndex index(p, reach);
  index.for_each_pair_within(reach, [&](std::size_t, std::size_t, double d) {
    for (std::size_t i = 0; i < r_grid.size(); ++i) sums[i] += 2 * epanechnikov(r_grid[i] - d, bandwidth);
  });
  return sums;
}

/// Kernel-smoothed pair correlation g(r); Poisson reference 1.
/// bandwidth <= 0 selects the default 0.15 * max(r_grid).
inline CurveEstimate pair_correlation(const GeneratorSpec& spec, const Window& w, std::span<const double> r_grid,
                                      double bandwidth, std::size_t reps, const RandomStream& stream) {
  detail::require_periodic(w, "pair_correlation");
  detail::require_radii(r_grid, w, "pair_correlation");
  if (r_grid.front() <= 0) throw InvalidArgument("pair_correlation: radius 0 is not allowed");
  if (bandwidth <= 0) bandwidth = 0.15 * r_grid.back();
  if (!(r_grid.back() + bandwidth < w.min_side() / 2))
    throw InvalidArgument("pair_correlation: radius plus bandwidth must stay below half the window side");
  if (reps < 1) throw InvalidArgument("pair_correlation: reps must be >= 1");
  struct Rep {
    std::size_t n = 0;
    std::vector<double> sums;
  };
  const auto per = parallel_map(reps, [&](std::size_t r) {
    const PointPattern p = sample(spec, w, stream.derive(r));
    return Rep{p.size(), kernel_pair_sums(p, r_grid, bandwidth)};
  });
  std::size_t empty = 0, total = 0;
  for (const auto& rep : per) {
    empty += rep.n == 0;
    total += rep.n;
  }
  if (static_cast<double>(empty) > kEmptyReplicationLimit * static_cast<double>(reps))
    throw Error("pair_correlation: more than half of the replications are empty");
  const double vol = volume(w);
  const double lam = static_cast<double>(total) / (static_cast<double>(reps) * vol);
  const int d = static_cast<int>(w.dim());
  CurveEstimate out;
  out.abscissa.assign(r_grid.begin(), r_grid.end());
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    const double surface = d * unit_ball_volume(d) * std::pow(r_grid[i], d - 1);
    std::vector<double> vals;
    for (const auto& rep : per)
      if (rep.n > 0) vals.push_back(rep.sums[i] / (lam * lam * vol * surface));
    out.estimates.push_back(summarize(vals));
  }
  return out;
}

/// Per-replication region counts at several scales (shared placements).
inline std::vector<std::vector<std::vector<std::int64_t>>> region_counts(const GeneratorSpec& spec, const Window& w,
                                                                         std::span<const Region> regions,
                                                                         std::size_t placements, std::size_t reps,
                                                                         const RandomStream& stream) {
  if (reps < 1 || placements < 1) throw InvalidArgument("reps and placements must be >= 1");
  return parallel_map(reps, [&](std::size_t r) {
    return detail::replication_region_counts(spec, w, regions, placements, stream.derive(r));
  });
}

/// Per-replication means of g(count) over placements, summarised across replications.
template <class G>
EstimateWithError replicate_mean(const std::vector<std::vector<std::vector<std::int64_t>>>& counts, std::size_t scale, G&& g) {
  std::vector<double> vals;
  vals.reserve(counts.size());
  for (const auto& rep : counts) {
    std::vector<double> inner;
    inner.reserve(rep[scale].size());
    for (std::int64_t n : rep[scale]) inner.push_back(g(n));
    vals.push_back(mean_of(inner));
  }
  return summarize(vals);
}

/// P(Phi(B) = 0) for a randomly placed region B.
inline EstimateWithError void_probability(const GeneratorSpec& spec, const Window& w, const Region& region,
                                          std::size_t placements, std::size_t reps, const RandomStream& stream) {
  const Region regions[] = {region};
  const auto counts = region_counts(spec, w, regions, placements, reps, stream);
  return replicate_mean(counts, 0, [](std::int64_t n) { return n == 0 ? 1.0 : 0.0; });
}

/// E[N (N-1) ... (N-k+1)] for the count N in a randomly placed box, 1 <= k <= 4.
inline EstimateWithError factorial_moment(const GeneratorSpec& spec, const Window& w, double box_side, int k,
                                          std::size_t placements, std::size_t reps, const RandomStream& stream) {
  if (k < 1 || k > 4) throw InvalidArgument("factorial_moment: k must be in [1, 4]");
  const Region regions[] = {Region::box(box_side)};
  const auto counts = region_counts(spec, w, regions, placements, reps, stream);
  return replicate_mean(counts, 0, [k](std::int64_t n) { return detail::falling_factorial(n, k); });
}

/// Variance of the box count from pooled moments, bias-corrected by
/// M/(M-1) with M = reps * placements; SE by delete-one-replication jackknife.
inline EstimateWithError count_variance_from(const std::vector<std::vector<std::vector<std::int64_t>>>& counts, std::size_t scale) {
  const std::size_t reps = counts.size();
  std::vector<double> s1(reps), s2(reps);
  std::size_t per = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto& c = counts[r][scale];
    per = c.size();
    for (std::int64_t n : c) {
      s1[r] += static_cast<double>(n);
      s2[r] += static_cast<double>(n) * static_cast<double>(n);
    }
  }
  auto estimate = [&](double t1, double t2, double m) {
    if (m < 2) return 0.0;
    const double mu = t1 / m;
    return (t2 / m - mu * mu) * m / (m - 1);
  };
  const double T1 = pairwise_sum(s1), T2 = pairwise_sum(s2);
  const double M = static_cast<double>(reps * per);
  EstimateWithError e;
  e.value = estimate(T1, T2, M);
  e.replications = reps;
  if (reps > 1) {
    std::vector<double> jack(reps);
    for (std::size_t r = 0; r < reps; ++r) jack[r] = estimate(T1 - s1[r], T2 - s2[r], M - static_cast<double>(per));
    const double jm = mean_of(jack);
    double ss = 0;
    for (double j : jack) ss += (j - jm) * (j - jm);
    e.std_error = std::sqrt(ss * static_cast<double>(reps - 1) / static_cast<double>(reps));
  }
  return e;
}

inline EstimateWithError count_variance(const GeneratorSpec& spec, const Window& w, double box_side,
                                        std::size_t placements, std::size_t reps, const RandomStream& stream) {
  const Region regions[] = {Region::box(box_side)};
  return count_variance_from(region_counts(spec, w, regions, placements, reps, stream), 0);
}

enum class LaplaceSign { plus, minus };

/// Mean over replications of exp(+-sum_{X} f(X)), accumulated in log space.
/// Throws std::overflow_error when the result is not representable.
inline EstimateWithError laplace_functional(const GeneratorSpec& spec, const Window& w,
                                            const std::function<double(const Point&)>& f, LaplaceSign sign,
                                            std::size_t reps, const RandomStream& stream) {
  if (reps < 1) throw InvalidArgument("laplace_functional: reps must be >= 1");
  const double sgn = sign == LaplaceSign::plus ? 1.0 : -1.0;
  const auto logs = parallel_map(reps, [&](std::size_t r) {
    const PointPattern p = sample(spec, w, stream.derive(r));
    std::vector<double> terms;
    terms.reserve(p.size());
    for (const auto& x : p.points) {
      const double v = f(x);
      if (!(v >= 0) || !std::isfinite(v)) throw InvalidArgument("laplace_functional: f must be finite and non-negative");
      terms.push_back(v);
    }
    return sgn * pairwise_sum(terms);
  });
  const double top = *std::max_element(logs.begin(), logs.end());
  std::vector<double> scaled(reps);
  for (std::size_t r = 0; r < reps; ++r) scaled[r] = std::exp(logs[r] - top);
  EstimateWithError e = summarize(scaled);
  if (top > std::log(std::numeric_limits<double>::max()) - std::log(std::max(e.value, 1e-300)))
    throw std::overflow_error("laplace_functional: exp(sum f) overflows");
  const double factor = std::exp(top);
  e.value *= factor;
  e.std_error *= factor;
  return e;
}

}  // namespace ppclust

#endif  // PPCLUST_SUMMARIES_HPP
