#ifndef PPCLUST_SHOTNOISE_HPP
#define PPCLUST_SHOTNOISE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "core.hpp"
#include "dists.hpp"
#include "neighbors.hpp"
#include "parallel.hpp"
#include "procgen.hpp"
#include "random.hpp"
#include "stats.hpp"

namespace ppclust {

/// Radial response h(|x - y|), non-negative and non-increasing.
class ResponseFunction {
 public:
  enum class Kind { indicator_ball, exponential, power_law, tabulated };

  /// 1 on the closed ball of radius rho.
  static ResponseFunction indicator_ball(double rho) {
    if (!(rho > 0) || !std::isfinite(rho)) throw InvalidArgument("indicator_ball: radius must be positive");
    ResponseFunction h(Kind::indicator_ball);
    h.a_ = rho;
    return h;
  }
  /// exp(-beta r)
  static ResponseFunction exponential(double beta) {
    if (!(beta > 0) || !std::isfinite(beta)) throw InvalidArgument("exponential: beta must be positive");
    ResponseFunction h(Kind::exponential);
    h.a_ = beta;
    return h;
  }
  /// (eps + r)^(-beta); integrability in d dimensions needs beta > d.
  static ResponseFunction power_law(double beta, double eps) {
    if (!(beta > 0) || !std::isfinite(beta)) throw InvalidArgument("power_law: beta must be positive");
    if (!(eps >= 0) || !std::isfinite(eps)) throw InvalidArgument("power_law: eps must be >= 0");
    ResponseFunction h(Kind::power_law);
    h.a_ = beta;
    h.b_ = eps;
    return h;
  }
  /// Piecewise linear through (radii[i], values[i]); constant before the
  /// first radius and zero beyond the last.
  static ResponseFunction tabulated(std::vector<double> radii, std::vector<double> values) {
    if (radii.empty() || radii.size() != values.size()) throw InvalidArgument("tabulated: radii and values must match");
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (!(radii[i] >= 0) || !(values[i] >= 0) || !std::isfinite(values[i]) || !std::isfinite(radii[i]))
        throw InvalidArgument("tabulated: entries must be finite and non-negative");
      if (i > 0 && !(radii[i] > radii[i - 1])) throw InvalidArgument("tabulated: radii must increase");
      if (i > 0 && values[i] > values[i - 1]) throw InvalidArgument("tabulated: values must be non-increasing");
    }
    ResponseFunction h(Kind::tabulated);
    h.radii_ = std::move(radii);
    h.values_ = std::move(values);
    return h;
  }

  Kind kind() const { return kind_; }
  double param() const { return a_; }
  double eps() const { return b_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<double>& table() const { return values_; }

  double operator()(double r) const {
    switch (kind_) {
      case Kind::indicator_ball: return r <= a_ ? 1.0 : 0.0;
      case Kind::exponential: return std::exp(-a_ * r);
      case Kind::power_law: return std::pow(b_ + r, -a_);
      case Kind::tabulated: {
        if (r <= radii_.front()) return values_.front();
        if (r > radii_.back()) return 0.0;
        const auto it = std::lower_bound(radii_.begin(), radii_.end(), r);
        const std::size_t j = static_cast<std::size_t>(it - radii_.begin());
        const double t = (r - radii_[j - 1]) / (radii_[j] - radii_[j - 1]);
        return values_[j - 1] + t * (values_[j] - values_[j - 1]);
      }
    }
    return 0;
  }

  /// Radius beyond which h vanishes (infinity for unbounded support).
  double support() const {
    switch (kind_) {
      case Kind::indicator_ball: return a_;
      case Kind::tabulated: return radii_.back();
      default: return std::numeric_limits<double>::infinity();
    }
  }

  /// h(0), possibly infinite.
  double peak() const { return (*this)(0.0); }

  /// Largest r with h(r) >= v (generalized inverse); 0 if v > h(0).
  double inverse(double v) const {
    if (!(v > 0)) return support();
    if (v > peak()) return 0;
    switch (kind_) {
      case Kind::indicator_ball: return a_;
      case Kind::exponential: return -std::log(v) / a_;
      case Kind::power_law: return std::max(0.0, std::pow(v, -1 / a_) - b_);
      case Kind::tabulated: {
        for (std::size_t j = radii_.size(); j-- > 0;) {
          if (values_[j] >= v) {
            if (j + 1 == radii_.size() || values_[j + 1] == values_[j]) return radii_[j];
            const double t = (values_[j] - v) / (values_[j] - values_[j + 1]);
            return radii_[j] + t * (radii_[j + 1] - radii_[j]);
          }
        }
        return radii_.front();
      }
    }
    return 0;
  }

  /// Checks the integrability of h over R^d.
  void require_integrable(std::size_t d) const {
    if (kind_ == Kind::power_law && !(a_ > static_cast<double>(d)))
      throw InvalidArgument("power_law: beta must exceed the dimension");
  }

 private:
  explicit ResponseFunction(Kind k) : kind_(k) {}
  Kind kind_;
  double a_ = 0, b_ = 0;
  std::vector<double> radii_, values_;
};

inline std::string describe(const ResponseFunction& h) {
  switch (h.kind()) {
    case ResponseFunction::Kind::indicator_ball: return "indicator_ball(" + std::to_string(h.param()) + ")";
    case ResponseFunction::Kind::exponential: return "exponential(" + std::to_string(h.param()) + ")";
    case ResponseFunction::Kind::power_law:
      return "power_law(" + std::to_string(h.param()) + "," + std::to_string(h.eps()) + ")";
    case ResponseFunction::Kind::tabulated: return "tabulated(" + std::to_string(h.radii().size()) + ")";
  }
  return "?";
}

struct FieldSample {
  std::vector<Point> eval_points;
  std::vector<double> values;
};

namespace detail {

template <class Combine>
FieldSample shot_field(const PointPattern& p, const ResponseFunction& h, std::span<const Point> eval, Combine combine) {
  FieldSample out;
  out.eval_points.assign(eval.begin(), eval.end());
  const double reach = h.support();
  const bool local = std::isfinite(reach) && reach < p.window.min_side() / 2;
  std::optional<CellIndex> index;
  if (local && !p.empty()) index.emplace(p, reach);
  out.values = parallel_map(eval.size(), [&](std::size_t j) {
    double acc = 0;
    if (index) {
      index->for_each_within(eval[j], reach, [&](std::size_t, double d) { acc = combine(acc, h(d)); });
    } else {
      for (const auto& x : p.points) acc = combine(acc, h(distance(x, eval[j], p.window)));
    }
    return acc;
  });
  return out;
}

}  // namespace detail

/// V(y) = sum over pattern points of h(|X - y|), window metric.
inline FieldSample additive_field(const PointPattern& p, const ResponseFunction& h, std::span<const Point> eval) {
  return detail::shot_field(p, h, eval, [](double acc, double v) { return acc + v; });
}

/// U(y) = max over pattern points of h(|X - y|); 0 for an empty pattern.
inline FieldSample extremal_field(const PointPattern& p, const ResponseFunction& h, std::span<const Point> eval) {
  return detail::shot_field(p, h, eval, [](double acc, double v) { return std::max(acc, v); });
}

/// Number of balls B_r(X) covering each grid-cell centre. Disks are
/// rasterized onto the grid, so the cost is O(n r^d / cell volume).
inline FieldSample coverage_field(const PointPattern& p, double r, std::size_t grid_n) {
  const Window& w = p.window;
  if (!(r >= 0)) throw InvalidArgument("coverage_field: r must be >= 0");
  if (w.metric() == Metric::periodic && !(r < w.min_side() / 2))
    throw InvalidArgument("coverage_field: r must be below half the smallest window side");
  FieldSample out;
  out.eval_points = grid_centers(w, grid_n);
  out.values.assign(out.eval_points.size(), 0.0);
  const std::size_t d = w.dim();
  const bool periodic = w.metric() == Metric::periodic;
  const double r2 = r * r;
  for (const auto& x : p.points) {
    std::array<long, kMaxDim> lo{}, hi{}, idx{};
    bool empty = false;
    for (std::size_t i = 0; i < d; ++i) {
      const double cell = w.side(i) / static_cast<double>(grid_n);
      // centre of cell c is lower + (c + 1/2) cell
      lo[i] = static_cast<long>(std::ceil((x[i] - r - w.lower()[i]) / cell - 0.5));
      hi[i] = static_cast<long>(std::floor((x[i] + r - w.lower()[i]) / cell - 0.5));
      if (!periodic) {
        lo[i] = std::max(lo[i], 0L);
        hi[i] = std::min(hi[i], static_cast<long>(grid_n) - 1);
      }
      empty |= lo[i] > hi[i];
      idx[i] = lo[i];
    }
    while (!empty) {
      std::size_t flat = 0;
      double dist2 = 0;
      for (std::size_t i = d; i-- > 0;) {
        const double cell = w.side(i) / static_cast<double>(grid_n);
        const double c = w.lower()[i] + (static_cast<double>(idx[i]) + 0.5) * cell;
        dist2 += (c - x[i]) * (c - x[i]);
        const long n = static_cast<long>(grid_n);
        const long wrapped = ((idx[i] % n) + n) % n;
        flat = flat * grid_n + static_cast<std::size_t>(wrapped);
      }
      if (dist2 <= r2) out.values[flat] += 1;
      std::size_t i = 0;
      for (; i < d; ++i) {
        if (++idx[i] <= hi[i]) break;
        idx[i] = lo[i];
      }
      if (i == d) break;
    }
  }
  return out;
}

/// Cell volume times the number of grid cells covered at least k times, for
/// k = 1..k_max, from a single coverage raster.
inline std::vector<double> k_covered_volumes(const PointPattern& p, double r, int k_max, std::size_t grid_n) {
  if (k_max < 1) throw InvalidArgument("k_covered_volume: k must be >= 1");
  const auto field = coverage_field(p, r, grid_n);
  const double cell_vol = volume(p.window) / static_cast<double>(field.values.size());
  std::vector<double> out(static_cast<std::size_t>(k_max), 0.0);
  for (double v : field.values)
    for (int k = 1; k <= k_max && v >= k; ++k) out[static_cast<std::size_t>(k - 1)] += cell_vol;
  return out;
}

/// Mean k-covered volume for k = 1..k_max over replications.
inline std::vector<EstimateWithError> k_covered_volume_curve(const GeneratorSpec& spec, const Window& w, double r,
                                                             int k_max, std::size_t grid_n, std::size_t reps,
                                                             const RandomStream& stream) {
  if (reps < 1) throw InvalidArgument("k_covered_volume: reps must be >= 1");
  const auto per = parallel_map(reps, [&](std::size_t i) {
    return k_covered_volumes(sample(spec, w, stream.derive(i)), r, k_max, grid_n);
  });
  std::vector<EstimateWithError> out;
  for (int k = 0; k < k_max; ++k) {
    std::vector<double> vals;
    for (const auto& v : per) vals.push_back(v[static_cast<std::size_t>(k)]);
    out.push_back(summarize(vals));
  }
  return out;
}

inline EstimateWithError k_covered_volume(const GeneratorSpec& spec, const Window& w, double r, int k,
                                          std::size_t grid_n, std::size_t reps, const RandomStream& stream) {
  return k_covered_volume_curve(spec, w, r, k, grid_n, reps, stream).back();
}

struct CoverageCrossing {
  std::vector<EstimateWithError> volume_a, volume_b;
  std::optional<int> k0;  ///< first k where the sign of (A - B) differs from that at k = 1
};

/// First k at which sign(A_k - B_k) flips relative to k = 1; values within
/// `band` of each other count as ties and never flip.
inline std::optional<int> first_sign_flip(std::span<const double> diff, std::span<const double> band) {
  int s0 = 0;
  for (std::size_t k = 0; k < diff.size(); ++k) {
    const int s = diff[k] > band[k] ? 1 : diff[k] < -band[k] ? -1 : 0;
    if (k == 0) {
      s0 = s;
      if (s0 == 0) return std::nullopt;
    } else if (s == -s0) {
      return static_cast<int>(k + 1);
    }
  }
  return std::nullopt;
}

/// Empirical k-coverage crossing of two processes; differences within two
/// pooled SE are ties. A and B use independent sub-streams.
inline CoverageCrossing coverage_crossing(const GeneratorSpec& a, const GeneratorSpec& b, const Window& w, double r,
                                          int k_max, std::size_t grid_n, std::size_t reps, const RandomStream& stream) {
  CoverageCrossing c;
  c.volume_a = k_covered_volume_curve(a, w, r, k_max, grid_n, reps, stream.derive(0));
  c.volume_b = k_covered_volume_curve(b, w, r, k_max, grid_n, reps, stream.derive(1));
  std::vector<double> diff, band;
  for (int k = 0; k < k_max; ++k) {
    diff.push_back(c.volume_a[k].value - c.volume_b[k].value);
    band.push_back(2 * std::hypot(c.volume_a[k].std_error, c.volume_b[k].std_error));
  }
  c.k0 = first_sign_flip(diff, band);
  return c;
}

/// Exact crossing of P(N_A >= k) and P(N_B >= k) for ball-count laws.
inline std::optional<int> analytic_coverage_crossing(const CountDistribution& a, const CountDistribution& b, int k_max) {
  std::vector<double> diff, band;
  double ta = 1, tb = 1;  // P(N >= k), starting at k = 0
  for (int k = 1; k <= k_max; ++k) {
    ta -= pmf(a, k - 1);
    tb -= pmf(b, k - 1);
    diff.push_back(ta - tb);
    band.push_back(1e-12);
  }
  return first_sign_flip(diff, band);
}

/// Law of Phi(B_O(r)) when it is available in closed form: Poisson and
/// discrete mixed Poisson processes.
inline std::optional<CountDistribution> ball_count_law(const GeneratorSpec& spec, double r, std::size_t d) {
  const double vol = ball_volume(static_cast<int>(d), r);
  if (const auto* p = std::get_if<HomogeneousPoisson>(&spec)) return CountDistribution::poisson(p->intensity * vol);
  if (const auto* m = std::get_if<MixedPoisson>(&spec); m && !m->mixing) {
    std::vector<CountDistribution> comps;
    for (double l : m->intensities) comps.push_back(CountDistribution::poisson(l * vol));
    return CountDistribution::mixture(m->weights, std::move(comps));
  }
  return std::nullopt;
}

enum class LevelDirection { min_above, max_below };

struct LevelBound {
  double value = 1;   ///< min(1, bound)
  double best_s = 0;  ///< minimizing s (0 when the bound is vacuous)
  bool finite = true;  ///< false when the exponential moment diverges
};

namespace detail {

/// int_{R^d} (exp(sign s h(|x|)) - 1) dx; +inf when divergent.
inline double exp_moment_integral(const ResponseFunction& h, double s, double sign, std::size_t d) {
  using Kind = ResponseFunction::Kind;
  const int di = static_cast<int>(d);
  if (h.kind() == Kind::indicator_ball) return std::expm1(sign * s) * ball_volume(di, h.param());
  if (h.kind() == Kind::power_law && h.eps() == 0 && sign > 0) return std::numeric_limits<double>::infinity();
  const double surface = static_cast<double>(d) * unit_ball_volume(di);
  auto f = [&](double r) {
    const double v = h(r);
    return std::expm1(sign * s * v) * std::pow(r, di - 1);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  constexpr double tol = 1e-8;
  double total = 0;
  if (h.kind() == Kind::tabulated) {
    double lo = 0;
    for (double knot : h.radii()) {
      if (knot > lo) total += GK::integrate(f, lo, knot, 15, tol);
      lo = knot;
    }
  } else {
    // split where s h(r) ~ 1 so that the infinite tail is smooth
    double split = h.inverse(std::min(h.peak(), 1 / s));
    split = std::max(split, h.kind() == Kind::exponential ? 1 / h.param() : 1.0);
    total = GK::integrate(f, 0.0, split, 15, tol) + GK::integrate(f, split, std::numeric_limits<double>::infinity(), 15, tol);
  }
  return surface * total;
}

}  // namespace detail

/// Chernoff bound on P(V >= a) (min_above) or P(V <= a) (max_below) for the
/// additive shot noise V at a point of a stationary process of intensity
/// lambda:
///   min_above: inf_s exp(-s a + lambda int (e^{s h} - 1)),
///   max_below: inf_s exp( s a + lambda int (e^{-s h} - 1)).
/// s ranges over a log grid 2^-10..2^6 refined by golden-section search.
inline LevelBound level_exceedance_bound(double lambda, const ResponseFunction& h, double a, LevelDirection dir,
                                         std::size_t d = 2) {
  if (!(a > 0)) throw InvalidArgument("level_exceedance_bound: a must be positive");
  if (!(lambda >= 0)) throw InvalidArgument("level_exceedance_bound: lambda must be >= 0");
  h.require_integrable(d);
  const double sign = dir == LevelDirection::min_above ? 1.0 : -1.0;
  if (lambda == 0) {
    // V = 0 almost surely
    if (dir == LevelDirection::min_above) return {0.0, std::numeric_limits<double>::infinity(), true};
    return {1.0, 0.0, true};
  }
  auto log_bound = [&](double log2s) {
    const double s = std::exp2(log2s);
    const double integral = detail::exp_moment_integral(h, s, sign, d);
    return -sign * s * a + lambda * integral;
  };
  constexpr int steps_per_octave = 8;
  double best_t = -10, best = log_bound(-10);
  bool any_finite = std::isfinite(best);
  for (int i = 1; i <= 16 * steps_per_octave; ++i) {
    const double t = -10 + static_cast<double>(i) / steps_per_octave;
    const double v = log_bound(t);
    any_finite |= std::isfinite(v);
    if (v < best) best = v, best_t = t;
  }
  if (!any_finite) return {1.0, 0.0, false};
  // golden-section refinement on the bracketing cell
  double lo = std::max(-10.0, best_t - 1.0 / steps_per_octave), hi = std::min(6.0, best_t + 1.0 / steps_per_octave);
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = log_bound(x1), f2 = log_bound(x2);
  while (hi - lo > 1e-9) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = log_bound(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = log_bound(x2);
    }
  }
  if (f1 < best) best = f1, best_t = x1;
  if (f2 < best) best = f2, best_t = x2;
  if (best >= 0) return {1.0, std::exp2(best_t), true};
  return {std::exp(best), std::exp2(best_t), true};
}

/// Empirical P(V(c) >= a) (min_above) or P(V(c) <= a) (max_below) at the
/// window centre c.
inline EstimateWithError exceedance_frequency(const GeneratorSpec& spec, const Window& w, const ResponseFunction& h,
                                              double a, LevelDirection dir, std::size_t reps, const RandomStream& stream) {
  if (reps < 1) throw InvalidArgument("exceedance_frequency: reps must be >= 1");
  Point c(w.dim());
  for (std::size_t i = 0; i < w.dim(); ++i) c[i] = (w.lower()[i] + w.upper()[i]) / 2;
  const auto hits = parallel_map(reps, [&](std::size_t i) {
    const PointPattern p = sample(spec, w, stream.derive(i));
    double v = 0;
    for (const auto& x : p.points) v += h(distance(x, c, w));
    return dir == LevelDirection::min_above ? (v >= a ? 1.0 : 0.0) : (v <= a ? 1.0 : 0.0);
  });
  EstimateWithError e = summarize(hits);
  e.std_error = binomial_se(e.value, reps);
  return e;
}

}  // namespace ppclust

#endif  // PPCLUST_SHOTNOISE_HPP
