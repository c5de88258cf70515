#ifndef PPCLUST_PERCOLATION_HPP
#define PPCLUST_PERCOLATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "core.hpp"
#include "neighbors.hpp"
#include "parallel.hpp"
#include "procgen.hpp"
#include "random.hpp"
#include "shotnoise.hpp"
#include "stats.hpp"

namespace ppclust {

struct Graph {
  using Edge = std::pair<std::uint32_t, std::uint32_t>;
  std::size_t n_vertices = 0;
  std::vector<Edge> edges;  ///< i < j, sorted, unique
  std::shared_ptr<const PointPattern> positions;

  std::vector<std::vector<std::uint32_t>> adjacency() const {
    std::vector<std::vector<std::uint32_t>> adj(n_vertices);
    for (auto [i, j] : edges) {
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
    return adj;
  }
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a), b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }
  std::size_t size_of(std::size_t x) { return size_[find(x)]; }
  std::size_t count() const { return parent_.size(); }

  /// Component sizes, descending.
  std::vector<std::size_t> sizes() {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < parent_.size(); ++i)
      if (find(i) == i) out.push_back(size_[i]);
    std::sort(out.rbegin(), out.rend());
    return out;
  }

 private:
  std::vector<std::size_t> parent_, size_;
};

namespace detail {

inline void require_unambiguous(const Window& w, double reach, const char* who) {
  if (w.metric() == Metric::periodic && !(reach < w.min_side() / 2))
    throw InvalidArgument(std::string(who) + ": connection distance must be below half the periodic window side");
}

struct WeightedEdge {
  double dist;
  std::uint32_t i, j;
  bool operator<(const WeightedEdge& o) const { return std::tie(dist, i, j) < std::tie(o.dist, o.i, o.j); }
};

/// All pairs within `reach`, sorted by distance.
inline std::vector<WeightedEdge> sorted_pairs(const PointPattern& p, double reach) {
  std::vector<WeightedEdge> out;
  if (p.size() < 2) return out;
  const CellIndex index(p, reach);
  index.for_each_pair_within(reach, [&](std::size_t i, std::size_t j, double d) {
    out.push_back({d, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Edge iff distance <= 2r (balls of radius r intersect).
inline Graph gilbert_graph(const PointPattern& p, double r) {
  if (!(r >= 0)) throw InvalidArgument("gilbert_graph: r must be >= 0");
  detail::require_unambiguous(p.window, 2 * r, "gilbert_graph");
  Graph g;
  g.n_vertices = p.size();
  g.positions = std::make_shared<const PointPattern>(p);
  if (p.size() >= 2) {
    const CellIndex index(*g.positions, 2 * r);
    index.for_each_pair_within(2 * r, [&](std::size_t i, std::size_t j, double) {
      g.edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    });
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

/// Connected component sizes, descending.
inline std::vector<std::size_t> components(const Graph& g) {
  UnionFind uf(g.n_vertices);
  for (auto [i, j] : g.edges) uf.unite(i, j);
  return uf.sizes();
}

struct PercolationSweep {
  std::vector<double> radii;
  std::vector<EstimateWithError> crossing_prob;
  std::vector<EstimateWithError> largest_fraction;
  std::vector<EstimateWithError> second_fraction;
};

namespace detail {

inline void require_increasing(std::span<const double> radii, const char* who) {
  if (radii.empty()) throw InvalidArgument(std::string(who) + ": no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= 0)) throw InvalidArgument(std::string(who) + ": radii must be >= 0");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw InvalidArgument(std::string(who) + ": radii must increase");
  }
}

/// Left / right slab membership of width `width` along axis 0.
inline bool in_left(const Window& w, const Point& x, double width) { return x[0] - w.lower()[0] <= width; }
inline bool in_right(const Window& w, const Point& x, double width) { return w.upper()[0] - x[0] <= width; }

/// Whether some component of the Gilbert graph at radius r meets both slabs
/// of width 2r. `pairs` must contain every pair within 2r.
inline bool crosses(const PointPattern& p, std::span<const WeightedEdge> pairs, double r) {
  if (p.empty()) return false;
  UnionFind uf(p.size() + 2);
  const std::size_t left = p.size(), right = p.size() + 1;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (in_left(p.window, p.points[k], 2 * r)) uf.unite(k, left);
    if (in_right(p.window, p.points[k], 2 * r)) uf.unite(k, right);
  }
  for (const auto& e : pairs) {
    if (e.dist > 2 * r) break;
    uf.unite(e.i, e.j);
  }
  return uf.find(left) == uf.find(right);
}

}  // namespace detail

/// Mean fractions of vertices in the largest and second largest components
/// of the Gilbert graph at each radius, plus the left-right crossing
/// frequency when the window is Euclidean (0 on periodic windows).
/// Each replication sorts its candidate edges once and sweeps the radii.
inline PercolationSweep component_fraction_sweep(const GeneratorSpec& spec, const Window& w,
                                                 std::span<const double> radii, std::size_t reps,
                                                 const RandomStream& stream) {
  detail::require_increasing(radii, "component_fraction_sweep");
  detail::require_unambiguous(w, 2 * radii.back(), "component_fraction_sweep");
  if (reps < 1) throw InvalidArgument("component_fraction_sweep: reps must be >= 1");
  struct Rep {
    std::vector<double> largest, second, crossing;
  };
  const bool euclid = w.metric() == Metric::euclidean;
  const auto per = parallel_map(reps, [&](std::size_t rep) {
    const PointPattern p = sample(spec, w, stream.derive(rep));
    const auto pairs = detail::sorted_pairs(p, 2 * radii.back());
    Rep out;
    const double n = static_cast<double>(p.size());
    UnionFind uf(p.size());
    std::size_t next = 0;
    for (double r : radii) {
      while (next < pairs.size() && pairs[next].dist <= 2 * r) {
        uf.unite(pairs[next].i, pairs[next].j);
        ++next;
      }
      const auto sizes = uf.sizes();
      out.largest.push_back(sizes.empty() ? 0.0 : static_cast<double>(sizes[0]) / n);
      out.second.push_back(sizes.size() < 2 ? 0.0 : static_cast<double>(sizes[1]) / n);
      out.crossing.push_back(euclid && detail::crosses(p, pairs, r) ? 1.0 : 0.0);
    }
    return out;
  });
  PercolationSweep sweep;
  sweep.radii.assign(radii.begin(), radii.end());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    std::vector<double> l, s, c;
    for (const auto& rep : per) {
      l.push_back(rep.largest[i]);
      s.push_back(rep.second[i]);
      c.push_back(rep.crossing[i]);
    }
    sweep.largest_fraction.push_back(summarize(l));
    sweep.second_fraction.push_back(summarize(s));
    auto cp = summarize(c);
    cp.std_error = binomial_se(cp.value, reps);
    sweep.crossing_prob.push_back(cp);
  }
  return sweep;
}

/// Fraction of replications whose Gilbert graph at radius r links the left
/// and right slabs (width 2r) of a Euclidean window.
inline EstimateWithError crossing_probability(const GeneratorSpec& spec, const Window& w, double r, std::size_t reps,
                                              const RandomStream& stream) {
  if (w.metric() != Metric::euclidean) throw InvalidArgument("crossing_probability: Euclidean window required");
  if (!(r >= 0)) throw InvalidArgument("crossing_probability: r must be >= 0");
  if (reps < 1) throw InvalidArgument("crossing_probability: reps must be >= 1");
  const auto hits = parallel_map(reps, [&](std::size_t rep) {
    const PointPattern p = sample(spec, w, stream.derive(rep));
    return detail::crosses(p, detail::sorted_pairs(p, 2 * r), r) ? 1.0 : 0.0;
  });
  auto e = summarize(hits);
  e.std_error = binomial_se(e.value, reps);
  return e;
}

namespace detail {

/// Smallest r at which the Gilbert graph crosses (infinity if never): a
/// bottleneck path from the left slab to the right slab, found by Kruskal
/// over slab events (x - lower)/2, (upper - x)/2 and pair events d/2.
/// Pairs are generated within a growing reach.
inline double crossing_threshold(const PointPattern& p) {
  if (p.empty()) return std::numeric_limits<double>::infinity();
  const Window& w = p.window;
  double diag = 0;
  for (std::size_t i = 0; i < w.dim(); ++i) diag += w.side(i) * w.side(i);
  diag = std::sqrt(diag);
  const std::size_t n = p.size();
  std::vector<WeightedEdge> slabs;
  slabs.reserve(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    slabs.push_back({p.points[k][0] - w.lower()[0], static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(n)});
    slabs.push_back({w.upper()[0] - p.points[k][0], static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(n + 1)});
  }
  std::sort(slabs.begin(), slabs.end());
  double reach = 2 * std::pow(volume(w) / static_cast<double>(n), 1.0 / static_cast<double>(w.dim()));
  while (true) {
    reach = std::min(reach, diag);
    const auto pairs = sorted_pairs(p, reach);
    UnionFind uf(n + 2);
    std::size_t a = 0, b = 0;
    while (a < slabs.size() || b < pairs.size()) {
      const bool take_slab = b == pairs.size() || (a < slabs.size() && slabs[a].dist <= pairs[b].dist);
      const WeightedEdge& e = take_slab ? slabs[a++] : pairs[b++];
      if (e.dist > reach) break;
      uf.unite(e.i, e.j);
      if (uf.find(n) == uf.find(n + 1)) return e.dist / 2;
    }
    if (reach >= diag) return std::numeric_limits<double>::infinity();
    reach *= 2;
  }
}

}  // namespace detail

/// Radius at which the crossing probability reaches 1/2, found by bisection
/// on [0, diag/4] with common random numbers: the same patterns serve every
/// radius, so the empirical curve is monotone. Each pattern's exact crossing
/// threshold is computed once. The error combines the final half bracket
/// with the binomial SE at 1/2 divided by the local slope.
inline EstimateWithError critical_radius(const GeneratorSpec& spec, const Window& w, std::size_t reps, double tol,
                                         const RandomStream& stream) {
  if (w.metric() != Metric::euclidean) throw InvalidArgument("critical_radius: Euclidean window required");
  if (!(tol > 0)) throw InvalidArgument("critical_radius: tol must be positive");
  if (reps < 1) throw InvalidArgument("critical_radius: reps must be >= 1");
  double diag = 0;
  for (std::size_t i = 0; i < w.dim(); ++i) diag += w.side(i) * w.side(i);
  diag = std::sqrt(diag);
  double lo = 0, hi = diag / 4;

  const auto thresholds = parallel_map(reps, [&](std::size_t rep) {
    return detail::crossing_threshold(sample(spec, w, stream.derive(rep)));
  });
  auto prob = [&](double r) {
    std::size_t hits = 0;
    for (double t : thresholds) hits += t <= r;
    return static_cast<double>(hits) / static_cast<double>(reps);
  };
  if (prob(lo) >= 0.5 || prob(hi) < 0.5) throw Error("critical_radius: no bracket for crossing probability 1/2");
  while (hi - lo > tol) {
    const double mid = (lo + hi) / 2;
    (prob(mid) >= 0.5 ? hi : lo) = mid;
  }
  EstimateWithError e;
  e.value = (lo + hi) / 2;
  e.replications = reps;
  const double delta = std::max(2 * tol, 0.02);
  const double slope = (prob(std::min(diag / 4, e.value + delta)) - prob(std::max(0.0, e.value - delta))) / (2 * delta);
  const double se_p = binomial_se(0.5, reps);
  e.std_error = (hi - lo) / 2 + (slope > 0 ? se_p / slope : delta);
  return e;
}

struct PercolationBounds {
  enum class Verdict { below, in, above };
  Verdict verdict = Verdict::in;
  double lower = 0, upper = 0;
};

/// 1/(lambda kappa_d)^(1/d) <= r_c <= sqrt(d) (log(3^d - 2) / lambda)^(1/d).
inline PercolationBounds check_percolation_bounds(double r_hat, double lambda, std::size_t d) {
  if (!(lambda > 0)) throw InvalidArgument("check_percolation_bounds: lambda must be positive");
  if (d < 1) throw InvalidArgument("check_percolation_bounds: d must be >= 1");
  const double dd = static_cast<double>(d);
  PercolationBounds b;
  b.lower = 1 / std::pow(lambda * unit_ball_volume(static_cast<int>(d)), 1 / dd);
  b.upper = std::sqrt(dd) * std::pow(std::log(std::pow(3.0, dd) - 2) / lambda, 1 / dd);
  b.verdict = r_hat < b.lower ? PercolationBounds::Verdict::below
            : r_hat > b.upper ? PercolationBounds::Verdict::above
                              : PercolationBounds::Verdict::in;
  return b;
}

inline std::string to_string(PercolationBounds::Verdict v) {
  switch (v) {
    case PercolationBounds::Verdict::below: return "below";
    case PercolationBounds::Verdict::in: return "in";
    case PercolationBounds::Verdict::above: return "above";
  }
  return "?";
}

namespace detail {

/// Left-right crossing of open sites on a grid_n^d grid (first axis fastest)
/// with close-packed adjacency (all 3^d - 1 neighbours).
inline bool grid_crosses(const std::vector<char>& open, std::size_t d, std::size_t grid_n) {
  const std::size_t total = open.size();
  UnionFind uf(total + 2);
  const std::size_t left = total, right = total + 1;
  std::array<std::size_t, kMaxDim> c{};
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t i = 0; i < d; ++i) {
      c[i] = rem % grid_n;
      rem /= grid_n;
    }
    if (!open[flat]) continue;
    if (c[0] == 0) uf.unite(flat, left);
    if (c[0] + 1 == grid_n) uf.unite(flat, right);
    // visit neighbour offsets in {-1,0,1}^d, each unordered pair once via flat order
    std::array<int, kMaxDim> off{};
    for (std::size_t i = 0; i < d; ++i) off[i] = -1;
    while (true) {
      bool valid = true, zero = true;
      std::size_t nb = 0, stride = 1;
      for (std::size_t i = 0; i < d; ++i) {
        const long v = static_cast<long>(c[i]) + off[i];
        if (v < 0 || v >= static_cast<long>(grid_n)) valid = false;
        zero &= off[i] == 0;
        nb += static_cast<std::size_t>(std::max(v, 0L)) * stride;
        stride *= grid_n;
      }
      if (valid && !zero && nb < flat && open[nb]) uf.unite(flat, nb);
      std::size_t i = 0;
      for (; i < d; ++i) {
        if (++off[i] <= 1) break;
        off[i] = -1;
      }
      if (i == d) break;
    }
  }
  return uf.find(left) == uf.find(right);
}

}  // namespace detail

/// Crossing frequency of the k-covered set, discretized on the grid of cell
/// centres: a cell is open iff at least k balls B_r(X) cover its centre.
inline EstimateWithError k_percolation_crossing(const GeneratorSpec& spec, const Window& w, double r, int k,
                                                std::size_t grid_n, std::size_t reps, const RandomStream& stream) {
  if (k < 1) throw InvalidArgument("k_percolation_crossing: k must be >= 1");
  if (w.metric() != Metric::euclidean) throw InvalidArgument("k_percolation_crossing: Euclidean window required");
  if (reps < 1) throw InvalidArgument("k_percolation_crossing: reps must be >= 1");
  const auto hits = parallel_map(reps, [&](std::size_t rep) {
    const auto field = coverage_field(sample(spec, w, stream.derive(rep)), r, grid_n);
    std::vector<char> open(field.values.size());
    for (std::size_t i = 0; i < open.size(); ++i) open[i] = field.values[i] >= k;
    return detail::grid_crosses(open, w.dim(), grid_n) ? 1.0 : 0.0;
  });
  auto e = summarize(hits);
  e.std_error = binomial_se(e.value, reps);
  return e;
}

struct SinrParams {
  double power = 1;       ///< P
  double noise = 0;       ///< N
  double threshold = 1;   ///< T
  double gamma = 0;       ///< interference factor
  ResponseFunction attenuation = ResponseFunction::exponential(1);

  void validate(std::size_t d) const {
    if (!(power > 0)) throw InvalidArgument("SinrParams: power must be positive");
    if (!(noise >= 0)) throw InvalidArgument("SinrParams: noise must be >= 0");
    if (!(threshold > 0)) throw InvalidArgument("SinrParams: threshold must be positive");
    if (!(gamma >= 0)) throw InvalidArgument("SinrParams: gamma must be >= 0");
    if (attenuation.peak() > 1) throw InvalidArgument("SinrParams: attenuation must not exceed 1");
    if (attenuation.peak() < threshold * noise / power)
      throw InvalidArgument("SinrParams: attenuation at 0 is below T N / P");
    // int x l(x) dx < infinity
    attenuation.require_integrable(std::max<std::size_t>(d, 2));
  }
  /// Range of the noise-limited link: l^{-1}(T N / P).
  double noise_range() const { return attenuation.inverse(threshold * noise / power); }
};

/// SINR(x -> y) = P l(|x - y|) / (N + gamma P I(y)), with I(y) the sum of
/// l(|z - y|) over interferers z other than x and y themselves. Edge iff the
/// SINR exceeds T in both directions.
inline Graph sinr_graph(const PointPattern& b, const PointPattern& interferers, const SinrParams& params) {
  if (b.window.dim() != interferers.window.dim()) throw InvalidArgument("sinr_graph: patterns must share a window");
  params.validate(b.window.dim());
  const Window& w = b.window;
  const auto& l = params.attenuation;
  const std::size_t n = b.size();
  // Full interference at every receiver, then subtract coincident own terms.
  std::vector<double> full(n, 0.0);
  if (params.gamma > 0) {
    full = parallel_map(n, [&](std::size_t y) {
      std::vector<double> terms;
      terms.reserve(interferers.size());
      for (const auto& z : interferers.points) terms.push_back(l(distance(z, b.points[y], w)));
      return pairwise_sum(terms);
    });
  }
  auto multiplicity = [&](const Point& x) {
    std::size_t m = 0;
    for (const auto& z : interferers.points) m += z == x;
    return m;
  };
  std::vector<std::size_t> mult(n, 0);
  if (params.gamma > 0)
    for (std::size_t i = 0; i < n; ++i) mult[i] = std::min<std::size_t>(1, multiplicity(b.points[i]));

  Graph g;
  g.n_vertices = n;
  g.positions = std::make_shared<const PointPattern>(b);
  const double l0 = l.peak();
  auto sinr = [&](std::size_t x, std::size_t y, double lxy) {
    double interference = 0;
    if (params.gamma > 0) {
      interference = full[y] - static_cast<double>(mult[y]) * l0 - static_cast<double>(mult[x]) * lxy;
      interference = std::max(0.0, interference);
    }
    const double denom = params.noise + params.gamma * params.power * interference;
    const double signal = params.power * lxy;
    return denom > 0 ? signal / denom : (signal > 0 ? INFINITY : 0.0);
  };
  const auto rows = parallel_map(n, [&](std::size_t i) {
    std::vector<Graph::Edge> out;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double lij = l(distance(b.points[i], b.points[j], w));
      if (lij <= 0) continue;
      if (sinr(i, j, lij) > params.threshold && sinr(j, i, lij) > params.threshold)
        out.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
    return out;
  });
  for (const auto& r : rows) g.edges.insert(g.edges.end(), r.begin(), r.end());
  return g;
}

}  // namespace ppclust

#endif  // PPCLUST_PERCOLATION_HPP
