#ifndef PPCLUST_COMPLEXES_HPP
#define PPCLUST_COMPLEXES_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "parallel.hpp"
#include "percolation.hpp"
#include "procgen.hpp"
#include "random.hpp"
#include "stats.hpp"

namespace ppclust {

inline constexpr int kMaxComplexDim = 4;
/// Points this close to a ball boundary count as inside.
inline constexpr double kMiniballTolerance = 1e-12;

using Face = std::vector<std::uint32_t>;

/// Abstract simplicial complex; faces[k] holds the k-faces (k+1 vertices,
/// ascending), sorted lexicographically.
struct SimplicialComplex {
  int max_dim = 0;
  std::vector<std::vector<Face>> faces;
  /// True when the rule admits no face above max_dim, so the top Betti
  /// number is determined too.
  bool complete = false;

  std::size_t n_vertices() const { return faces.empty() ? 0 : faces[0].size(); }
  std::optional<std::size_t> index_of(const Face& f) const {
    const std::size_t k = f.size() - 1;
    if (f.empty() || k >= faces.size()) return std::nullopt;
    const auto it = std::lower_bound(faces[k].begin(), faces[k].end(), f);
    if (it == faces[k].end() || *it != f) return std::nullopt;
    return static_cast<std::size_t>(it - faces[k].begin());
  }
};

struct Ball {
  Point centre;
  double radius = 0;
};

namespace detail {

inline void require_max_dim(int max_dim, const char* who) {
  if (max_dim < 0 || max_dim > kMaxComplexDim) throw InvalidArgument(std::string(who) + ": max_dim must be in [0, 4]");
}

/// Smallest sphere through all of `support` (centre in their affine hull).
inline std::optional<Ball> circumball(std::span<const Point> support) {
  const std::size_t m = support.size();
  if (m == 0) return std::nullopt;
  const std::size_t d = support[0].dim();
  if (m == 1) return Ball{support[0], 0};
  Eigen::MatrixXd v(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m - 1));
  for (std::size_t i = 1; i < m; ++i)
    for (std::size_t c = 0; c < d; ++c)
      v(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i - 1)) = support[i][c] - support[0][c];
  const Eigen::MatrixXd gram = v.transpose() * v;
  const Eigen::VectorXd rhs = gram.diagonal() / 2;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (lu.rank() < static_cast<Eigen::Index>(m - 1)) return std::nullopt;
  const Eigen::VectorXd a = lu.solve(rhs);
  const Eigen::VectorXd off = v * a;
  Point c(d);
  for (std::size_t i = 0; i < d; ++i) c[i] = support[0][i] + off(static_cast<Eigen::Index>(i));
  double r = 0;
  for (const auto& p : support) r = std::max(r, euclidean_distance(p, c));
  return Ball{c, r};
}

inline bool encloses(const Ball& b, std::span<const Point> pts) {
  for (const auto& p : pts)
    if (euclidean_distance(p, b.centre) > b.radius + kMiniballTolerance) return false;
  return true;
}

inline std::optional<Ball> welzl(std::vector<Point>& pts, std::size_t n, std::vector<Point>& support) {
  const std::size_t d = pts.empty() ? support[0].dim() : pts[0].dim();
  if (n == 0 || support.size() == d + 1) {
    if (support.empty()) return Ball{Point(d), 0};
    return circumball(support);
  }
  const Point p = pts[n - 1];
  auto b = welzl(pts, n - 1, support);
  if (b && euclidean_distance(p, b->centre) <= b->radius + kMiniballTolerance) return b;
  support.push_back(p);
  b = welzl(pts, n - 1, support);
  support.pop_back();
  return b;
}

/// Exhaustive: the smallest enclosing circumball over all supports.
inline Ball brute_miniball(std::span<const Point> pts) {
  Ball best{pts[0], std::numeric_limits<double>::infinity()};
  const std::size_t n = pts.size();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<Point> s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s.push_back(pts[i]);
    const auto b = circumball(s);
    if (b && b->radius < best.radius && encloses(*b, pts)) best = *b;
  }
  return best;
}

}  // namespace detail

/// Smallest enclosing ball of a few points (Welzl); falls back to exhaustive
/// search over supports when the recursion meets a degenerate support.
inline Ball miniball(std::span<const Point> pts) {
  if (pts.empty()) throw InvalidArgument("miniball: no points");
  std::vector<Point> work(pts.begin(), pts.end()), support;
  const auto b = detail::welzl(work, work.size(), support);
  if (b && detail::encloses(*b, pts)) return *b;
  return detail::brute_miniball(pts);
}

namespace detail {

/// Extends each k-face by higher common neighbours accepted by `keep`;
/// returns the (k+1)-faces in lexicographic order.
template <class Keep>
std::vector<Face> expand_faces(const std::vector<Face>& lower, const std::vector<std::vector<std::uint32_t>>& adj,
                               Keep&& keep) {
  const auto per = parallel_map(lower.size(), [&](std::size_t i) {
    const Face& f = lower[i];
    std::vector<Face> out;
    for (auto v : adj[f.back()]) {
      if (v <= f.back()) continue;
      bool common = true;
      for (std::size_t j = 0; j + 1 < f.size() && common; ++j)
        common = std::binary_search(adj[f[j]].begin(), adj[f[j]].end(), v);
      if (!common) continue;
      Face g = f;
      g.push_back(v);
      // facets through v must already be faces
      bool closed = true;
      for (std::size_t drop = 0; drop + 1 < g.size() && closed; ++drop) {
        Face h;
        for (std::size_t j = 0; j < g.size(); ++j)
          if (j != drop) h.push_back(g[j]);
        closed = std::binary_search(lower.begin(), lower.end(), h);
      }
      if (closed && keep(g)) out.push_back(std::move(g));
    }
    return out;
  });
  std::vector<Face> all;
  for (const auto& v : per) all.insert(all.end(), v.begin(), v.end());
  return all;
}

template <class Keep>
SimplicialComplex build_complex(const PointPattern& p, double r, int max_dim, Keep&& keep) {
  SimplicialComplex c;
  c.max_dim = max_dim;
  const Graph g = gilbert_graph(p, r);
  auto adj = g.adjacency();
  for (auto& a : adj) std::sort(a.begin(), a.end());
  c.faces.resize(static_cast<std::size_t>(max_dim) + 1);
  for (std::uint32_t v = 0; v < p.size(); ++v) c.faces[0].push_back({v});
  for (int k = 1; k <= max_dim; ++k) {
    if (k == 1) {
      for (auto [i, j] : g.edges) c.faces[1].push_back({i, j});
    } else {
      c.faces[static_cast<std::size_t>(k)] = expand_faces(c.faces[static_cast<std::size_t>(k) - 1], adj, keep);
    }
  }
  // one more layer decides completeness; stop at the first face found
  if (max_dim == 0) {
    c.complete = g.edges.empty();
  } else {
    std::atomic<bool> found{false};
    expand_faces(c.faces.back(), adj, [&](const Face& f) {
      if (found.load() || !keep(f)) return false;
      found.store(true);
      return false;
    });
    c.complete = !found.load();
  }
  return c;
}

}  // namespace detail

/// Clique complex of gilbert_graph(p, r): faces are vertex sets with all
/// pairwise distances <= 2r.
inline SimplicialComplex vietoris_rips(const PointPattern& p, double r, int max_dim) {
  detail::require_max_dim(max_dim, "vietoris_rips");
  return detail::build_complex(p, r, max_dim, [](const Face&) { return true; });
}

/// Cech complex: a face is kept iff the smallest ball enclosing its
/// vertices has radius <= r (+1e-12). Euclidean windows only.
inline SimplicialComplex cech_complex(const PointPattern& p, double r, int max_dim) {
  detail::require_max_dim(max_dim, "cech_complex");
  if (p.window.metric() != Metric::euclidean) throw InvalidArgument("cech_complex: requires a Euclidean window");
  auto keep = [&](const Face& f) {
    std::vector<Point> pts;
    for (auto v : f) pts.push_back(p.points[v]);
    return miniball(pts).radius <= r + kMiniballTolerance;
  };
  return detail::build_complex(p, r, max_dim, keep);
}

/// Every subset of a face is a face and each list is sorted and unique.
inline bool is_downward_closed(const SimplicialComplex& c) {
  for (std::size_t k = 0; k < c.faces.size(); ++k) {
    const auto& fk = c.faces[k];
    if (!std::is_sorted(fk.begin(), fk.end()) || std::adjacent_find(fk.begin(), fk.end()) != fk.end()) return false;
    for (const auto& f : fk) {
      if (f.size() != k + 1 || !std::is_sorted(f.begin(), f.end())) return false;
      if (k == 0) continue;
      for (std::size_t drop = 0; drop < f.size(); ++drop) {
        Face g;
        for (std::size_t j = 0; j < f.size(); ++j)
          if (j != drop) g.push_back(f[j]);
        if (!c.index_of(g)) return false;
      }
    }
  }
  return true;
}

inline std::vector<std::size_t> simplex_counts(const SimplicialComplex& c) {
  std::vector<std::size_t> s;
  for (const auto& f : c.faces) s.push_back(f.size());
  return s;
}

/// Rank over Z/2 of the boundary map from k-faces to (k-1)-faces, by column
/// reduction with pivot (lowest row) lookup.
inline std::size_t boundary_rank(const SimplicialComplex& c, std::size_t k) {
  if (k == 0 || k >= c.faces.size()) return 0;
  std::unordered_map<std::size_t, std::vector<std::size_t>> pivot_col;
  std::size_t rank = 0;
  for (const auto& f : c.faces[k]) {
    std::vector<std::size_t> col;
    for (std::size_t drop = 0; drop < f.size(); ++drop) {
      Face g;
      for (std::size_t j = 0; j < f.size(); ++j)
        if (j != drop) g.push_back(f[j]);
      const auto idx = c.index_of(g);
      if (!idx) throw Error("boundary_rank: complex is not downward closed");
      col.push_back(*idx);
    }
    std::sort(col.begin(), col.end());
    while (!col.empty()) {
      const auto it = pivot_col.find(col.back());
      if (it == pivot_col.end()) break;
      // col += reduced column (symmetric difference)
      std::vector<std::size_t> sum;
      std::set_symmetric_difference(col.begin(), col.end(), it->second.begin(), it->second.end(),
                                    std::back_inserter(sum));
      col = std::move(sum);
    }
    if (!col.empty()) {
      const std::size_t low = col.back();
      pivot_col.emplace(low, std::move(col));
      ++rank;
    }
  }
  return rank;
}

/// Betti numbers over Z/2, beta_k = S_k - rank d_k - rank d_{k+1}, for
/// every k the complex determines: k <= max_dim - 1, or k <= max_dim when
/// the complex is complete.
inline std::vector<std::size_t> betti_numbers(const SimplicialComplex& c) {
  const std::size_t top = c.complete ? c.faces.size() : c.faces.size() - 1;
  std::vector<std::size_t> ranks(c.faces.size() + 1, 0);
  for (std::size_t k = 1; k < c.faces.size(); ++k) ranks[k] = boundary_rank(c, k);
  std::vector<std::size_t> b;
  for (std::size_t k = 0; k < top; ++k) b.push_back(c.faces[k].size() - ranks[k] - ranks[k + 1]);
  return b;
}

inline std::size_t betti_number(const SimplicialComplex& c, int k) {
  if (k < 0) throw InvalidArgument("betti_number: k must be >= 0");
  const auto b = betti_numbers(c);
  if (static_cast<std::size_t>(k) >= b.size())
    throw InvalidArgument("betti_number: complex must be built to max_dim >= k + 1");
  return b[static_cast<std::size_t>(k)];
}

/// Alternating sum of face counts.
inline long long euler_characteristic(const SimplicialComplex& c) {
  long long chi = 0;
  for (std::size_t k = 0; k < c.faces.size(); ++k)
    chi += (k % 2 == 0 ? 1 : -1) * static_cast<long long>(c.faces[k].size());
  return chi;
}

struct BettiScalingRow {
  std::int64_t n = 0;
  double radius = 0;
  EstimateWithError betti;
  double p_zero = 0;
};

/// beta_k of the Cech complex of Phi restricted to W_n =
/// [-n^(1/d)/2, n^(1/d)/2)^d (Euclidean) at radius r_rule(n).
inline std::vector<BettiScalingRow> betti_scaling_experiment(const GeneratorSpec& spec,
                                                             const std::function<double(double)>& r_rule,
                                                             std::span<const std::int64_t> n_list, int k,
                                                             std::size_t reps, const RandomStream& stream,
                                                             std::size_t dim = 2) {
  if (k < 0 || k > 2) throw InvalidArgument("betti_scaling_experiment: k must be in [0, 2]");
  if (reps < 1) throw InvalidArgument("betti_scaling_experiment: reps must be >= 1");
  std::vector<BettiScalingRow> rows;
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    BettiScalingRow row;
    row.n = n_list[idx];
    if (row.n < 1) throw InvalidArgument("betti_scaling_experiment: n must be >= 1");
    row.radius = r_rule(static_cast<double>(row.n));
    if (!(row.radius > 0)) throw InvalidArgument("betti_scaling_experiment: r_n must be positive");
    const Window w = Window::centered_cube(dim, std::pow(static_cast<double>(row.n), 1.0 / static_cast<double>(dim)),
                                           Metric::euclidean);
    const auto betti = parallel_map(reps, [&](std::size_t rep) {
      const auto c = cech_complex(sample(spec, w, stream.derive(idx).derive(rep)), row.radius, k + 1);
      return static_cast<double>(betti_number(c, k));
    });
    row.betti = summarize(betti);
    std::vector<double> zero;
    for (double b : betti) zero.push_back(b == 0 ? 1.0 : 0.0);
    row.p_zero = mean_of(zero);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ppclust

#endif  // PPCLUST_COMPLEXES_HPP
