#ifndef PPCLUST_GRAPHS_HPP
#define PPCLUST_GRAPHS_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "parallel.hpp"
#include "percolation.hpp"
#include "procgen.hpp"
#include "random.hpp"
#include "stats.hpp"

namespace ppclust {

/// Random geometric graph: edge iff |X - Y| <= r. Same as gilbert_graph(p, r/2).
inline Graph rgg(const PointPattern& p, double r) {
  if (!(r >= 0)) throw InvalidArgument("rgg: r must be >= 0");
  return gilbert_graph(p, r / 2);
}

inline constexpr int kMaxMotifSize = 5;

/// Connected pattern graph on k <= 5 vertices.
class Motif {
 public:
  Motif(int k, std::vector<std::pair<int, int>> edges, std::string name = {}) : k_(k), name_(std::move(name)) {
    if (k < 1 || k > kMaxMotifSize) throw InvalidArgument("Motif: size must be in [1, 5]");
    for (auto [a, b] : edges) {
      if (a < 0 || b < 0 || a >= k || b >= k || a == b) throw InvalidArgument("Motif: bad edge");
      code_ |= bit(std::min(a, b), std::max(a, b));
    }
    // connectivity
    std::uint32_t seen = 1, frontier = 1;
    while (frontier) {
      std::uint32_t next = 0;
      for (int v = 0; v < k; ++v)
        if (frontier >> v & 1)
          for (int u = 0; u < k; ++u)
            if (u != v && adjacent(code_, v, u) && !(seen >> u & 1)) next |= 1u << u;
      seen |= next;
      frontier = next;
    }
    if (seen != (1u << k) - 1) throw InvalidArgument("Motif: must be connected");
  }

  int size() const { return k_; }
  const std::string& name() const { return name_; }
  std::uint32_t code() const { return code_; }
  std::uint32_t canonical() const { return canonical_code(k_, code_); }

  static Motif edge() { return Motif(2, {{0, 1}}, "edge"); }
  static Motif path3() { return Motif(3, {{0, 1}, {1, 2}}, "path3"); }
  static Motif triangle() { return Motif(3, {{0, 1}, {1, 2}, {0, 2}}, "triangle"); }
  static Motif star3() { return Motif(4, {{0, 1}, {0, 2}, {0, 3}}, "star3"); }
  static Motif path4() { return Motif(4, {{0, 1}, {1, 2}, {2, 3}}, "path4"); }
  static Motif cycle4() { return Motif(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, "cycle4"); }
  static Motif clique4() { return Motif(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, "clique4"); }

  static Motif named(const std::string& name) {
    for (auto m : {edge(), path3(), triangle(), star3(), path4(), cycle4(), clique4()})
      if (m.name() == name) return m;
    throw InvalidArgument("unknown motif '" + name + "'");
  }

  /// Bit index of the unordered pair (a < b) in the upper-triangular code.
  static std::uint32_t bit(int a, int b) { return 1u << (a * kMaxMotifSize + b); }
  static bool adjacent(std::uint32_t code, int a, int b) {
    return code & bit(std::min(a, b), std::max(a, b));
  }

  /// Minimum code over all vertex relabellings; cached per (k, code).
  static std::uint32_t canonical_code(int k, std::uint32_t code) {
    static const auto tables = [] {
      std::array<std::vector<std::uint32_t>, kMaxMotifSize + 1> t;
      for (int kk = 1; kk <= kMaxMotifSize; ++kk) {
        // compact index over the kk*(kk-1)/2 pair bits
        std::vector<std::pair<int, int>> pairs;
        for (int a = 0; a < kk; ++a)
          for (int b = a + 1; b < kk; ++b) pairs.emplace_back(a, b);
        const std::size_t n_codes = std::size_t{1} << pairs.size();
        t[kk].assign(n_codes, 0);
        std::vector<int> perm(kk);
        for (std::size_t c = 0; c < n_codes; ++c) {
          std::iota(perm.begin(), perm.end(), 0);
          std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
          do {
            std::uint32_t mapped = 0;
            for (std::size_t e = 0; e < pairs.size(); ++e)
              if (c >> e & 1) {
                const int a = perm[pairs[e].first], b = perm[pairs[e].second];
                mapped |= bit(std::min(a, b), std::max(a, b));
              }
            best = std::min(best, mapped);
          } while (std::next_permutation(perm.begin(), perm.end()));
          t[kk][c] = best;
        }
      }
      return t;
    }();
    std::uint32_t compact = 0;
    int e = 0;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b, ++e)
        if (code & bit(a, b)) compact |= 1u << e;
    return tables[k][compact];
  }

 private:
  int k_;
  std::uint32_t code_ = 0;
  std::string name_;
};

namespace detail {

/// Sorted adjacency lists.
inline std::vector<std::vector<std::uint32_t>> sorted_adjacency(const Graph& g) {
  auto adj = g.adjacency();
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

inline bool has_edge(const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t a, std::uint32_t b) {
  return std::binary_search(adj[a].begin(), adj[a].end(), b);
}

/// ESU enumeration of connected k-subsets whose smallest vertex is `root`.
template <class Visit>
void enumerate_connected(const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t root, int k, Visit&& visit) {
  std::vector<std::uint32_t> sub{root};
  auto in_neighbourhood = [&](std::uint32_t u) {
    for (auto s : sub)
      if (s == u || has_edge(adj, s, u)) return true;
    return false;
  };
  std::function<void(std::vector<std::uint32_t>)> extend = [&](std::vector<std::uint32_t> ext) {
    if (static_cast<int>(sub.size()) == k) {
      visit(std::span<const std::uint32_t>(sub));
      return;
    }
    while (!ext.empty()) {
      const std::uint32_t w = ext.back();
      ext.pop_back();
      std::vector<std::uint32_t> next = ext;
      for (auto u : adj[w])
        if (u > root && !in_neighbourhood(u) && std::find(next.begin(), next.end(), u) == next.end()) next.push_back(u);
      sub.push_back(w);
      extend(std::move(next));
      sub.pop_back();
    }
  };
  std::vector<std::uint32_t> ext;
  for (auto u : adj[root])
    if (u > root) ext.push_back(u);
  if (k == 1) {
    visit(std::span<const std::uint32_t>(sub));
    return;
  }
  extend(std::move(ext));
}

inline std::uint32_t induced_code(const std::vector<std::vector<std::uint32_t>>& adj, std::span<const std::uint32_t> s) {
  std::uint32_t code = 0;
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = a + 1; b < s.size(); ++b)
      if (has_edge(adj, s[a], s[b])) code |= Motif::bit(static_cast<int>(a), static_cast<int>(b));
  return code;
}

}  // namespace detail

/// Number of k-vertex subsets whose induced subgraph is isomorphic to the
/// motif (unordered; the ordered-tuple sum is k! times this).
inline std::uint64_t induced_subgraph_count(const Graph& g, const Motif& motif) {
  const auto adj = detail::sorted_adjacency(g);
  const int k = motif.size();
  const std::uint32_t target = motif.canonical();
  const auto per_root = parallel_map(g.n_vertices, [&](std::size_t root) {
    std::uint64_t count = 0;
    detail::enumerate_connected(adj, static_cast<std::uint32_t>(root), k, [&](std::span<const std::uint32_t> s) {
      count += Motif::canonical_code(k, detail::induced_code(adj, s)) == target;
    });
    return count;
  });
  return std::accumulate(per_root.begin(), per_root.end(), std::uint64_t{0});
}

/// Number of connected induced k-subsets (any shape).
inline std::uint64_t connected_subset_count(const Graph& g, int k) {
  if (k < 1 || k > kMaxMotifSize) throw InvalidArgument("connected_subset_count: k must be in [1, 5]");
  const auto adj = detail::sorted_adjacency(g);
  const auto per_root = parallel_map(g.n_vertices, [&](std::size_t root) {
    std::uint64_t count = 0;
    detail::enumerate_connected(adj, static_cast<std::uint32_t>(root), k, [&](std::span<const std::uint32_t>) { ++count; });
    return count;
  });
  return std::accumulate(per_root.begin(), per_root.end(), std::uint64_t{0});
}

using TupleFunction = std::function<double(std::span<const Point>)>;

namespace detail {

template <class Visit>
void for_each_subset(std::size_t n, int k, Visit&& visit) {
  if (k < 1 || static_cast<std::size_t>(k) > n) return;
  std::vector<std::size_t> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    visit(std::span<const std::size_t>(idx));
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - static_cast<std::size_t>(k - i)) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

inline double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace detail

/// Sum of a symmetric f over ordered k-tuples of distinct points,
/// computed as k! times the sum over unordered subsets.
inline double u_statistic(const PointPattern& p, int k, const TupleFunction& f) {
  if (k < 1 || k > 4) throw InvalidArgument("u_statistic: k must be in [1, 4]");
  std::vector<double> terms;
  std::vector<Point> tuple(static_cast<std::size_t>(k));
  detail::for_each_subset(p.size(), k, [&](std::span<const std::size_t> s) {
    for (std::size_t i = 0; i < s.size(); ++i) tuple[i] = p.points[s[i]];
    terms.push_back(f(tuple));
  });
  return detail::factorial(k) * pairwise_sum(terms);
}

/// f-values over unordered k-subsets as a 1-d pattern on [0, f_max^+).
inline PointPattern u_statistic_pattern(const PointPattern& p, int k, const TupleFunction& f) {
  if (k < 1 || k > 4) throw InvalidArgument("u_statistic_pattern: k must be in [1, 4]");
  std::vector<Point> values;
  std::vector<Point> tuple(static_cast<std::size_t>(k));
  double top = 0;
  detail::for_each_subset(p.size(), k, [&](std::span<const std::size_t> s) {
    for (std::size_t i = 0; i < s.size(); ++i) tuple[i] = p.points[s[i]];
    const double v = f(tuple);
    if (!(v >= 0) || !std::isfinite(v)) throw InvalidArgument("u_statistic_pattern: f must be finite and non-negative");
    top = std::max(top, v);
    values.push_back(Point{v});
  });
  const double upper = top > 0 ? std::nextafter(top, std::numeric_limits<double>::infinity()) : 1.0;
  PointPattern out{Window(Point{0.0}, Point{upper}, Metric::euclidean), std::move(values)};
  out.canonicalize();
  return out;
}

struct GraphStats {
  std::size_t clique_number = 0;
  std::size_t max_degree = 0;
  std::size_t chromatic_number = 0;
  bool chromatic_exact = true;
};

inline constexpr std::size_t kDefaultExactChromaticLimit = 60;
inline constexpr std::uint64_t kColoringNodeBudget = 5'000'000;

namespace detail {

/// Maximum clique by branch and bound with greedy-colouring bounds, rooted
/// at each vertex with its higher-numbered neighbours as candidates.
inline std::size_t max_clique(const std::vector<std::vector<std::uint32_t>>& adj) {
  const std::size_t n = adj.size();
  if (n == 0) return 0;
  std::size_t best = 1;
  std::function<void(std::vector<std::uint32_t>&, const std::vector<std::uint32_t>&)> expand =
      [&](std::vector<std::uint32_t>& clique, const std::vector<std::uint32_t>& cand) {
        // colour classes give an upper bound on the clique size within cand
        std::vector<std::uint32_t> order;
        std::vector<std::size_t> bound;
        std::vector<std::vector<std::uint32_t>> classes;
        for (auto v : cand) {
          std::size_t c = 0;
          for (; c < classes.size(); ++c) {
            bool ok = true;
            for (auto u : classes[c])
              if (has_edge(adj, v, u)) {
                ok = false;
                break;
              }
            if (ok) break;
          }
          if (c == classes.size()) classes.emplace_back();
          classes[c].push_back(v);
        }
        for (std::size_t c = 0; c < classes.size(); ++c)
          for (auto v : classes[c]) order.push_back(v), bound.push_back(c + 1);
        while (!order.empty()) {
          if (clique.size() + bound.back() <= best) return;
          const std::uint32_t v = order.back();
          order.pop_back();
          bound.pop_back();
          clique.push_back(v);
          std::vector<std::uint32_t> next;
          for (auto u : order)
            if (has_edge(adj, v, u)) next.push_back(u);
          if (next.empty()) best = std::max(best, clique.size());
          else expand(clique, next);
          clique.pop_back();
        }
      };
  std::vector<std::uint32_t> clique;
  for (std::uint32_t v = 0; v < n; ++v) {
    std::vector<std::uint32_t> cand;
    for (auto u : adj[v])
      if (u > v) cand.push_back(u);
    if (cand.size() + 1 <= best) continue;
    clique.assign(1, v);
    expand(clique, cand);
  }
  return best;
}

/// DSATUR greedy colouring; returns the number of colours.
inline std::size_t dsatur_greedy(const std::vector<std::vector<std::uint32_t>>& adj, std::span<const std::uint32_t> verts) {
  std::vector<int> colour(adj.size(), -1);
  std::size_t used = 0;
  for (std::size_t step = 0; step < verts.size(); ++step) {
    std::uint32_t pick = 0;
    int best_sat = -1, best_deg = -1;
    for (auto v : verts) {
      if (colour[v] >= 0) continue;
      std::vector<char> seen(used + 1, 0);
      int sat = 0;
      for (auto u : adj[v])
        if (colour[u] >= 0 && !seen[static_cast<std::size_t>(colour[u])]) seen[static_cast<std::size_t>(colour[u])] = 1, ++sat;
      const int deg = static_cast<int>(adj[v].size());
      if (sat > best_sat || (sat == best_sat && deg > best_deg)) pick = v, best_sat = sat, best_deg = deg;
    }
    std::vector<char> seen(used + 1, 0);
    for (auto u : adj[pick])
      if (colour[u] >= 0) seen[static_cast<std::size_t>(colour[u])] = 1;
    std::size_t c = 0;
    while (c < used && seen[c]) ++c;
    colour[pick] = static_cast<int>(c);
    used = std::max(used, c + 1);
  }
  return used;
}

/// Exact chromatic number of the induced subgraph on `verts` by DSATUR
/// branch and bound; `exact` is cleared if the node budget runs out.
inline std::size_t chromatic_exact(const std::vector<std::vector<std::uint32_t>>& adj, std::span<const std::uint32_t> verts,
                                   std::size_t lower, bool& exact) {
  std::size_t best = dsatur_greedy(adj, verts);
  if (best <= lower) return best;
  std::vector<int> colour(adj.size(), -1);
  std::uint64_t nodes = 0;
  std::function<void(std::size_t, std::size_t)> search = [&](std::size_t coloured, std::size_t used) {
    if (best <= lower || !exact) return;
    if (++nodes > kColoringNodeBudget) {
      exact = false;
      return;
    }
    if (coloured == verts.size()) {
      best = std::min(best, used);
      return;
    }
    std::uint32_t pick = 0;
    int best_sat = -1, best_deg = -1;
    for (auto v : verts) {
      if (colour[v] >= 0) continue;
      std::uint64_t mask = 0;
      for (auto u : adj[v])
        if (colour[u] >= 0) mask |= std::uint64_t{1} << colour[u];
      const int sat = std::popcount(mask);
      const int deg = static_cast<int>(adj[v].size());
      if (sat > best_sat || (sat == best_sat && deg > best_deg)) pick = v, best_sat = sat, best_deg = deg;
    }
    std::uint64_t forbidden = 0;
    for (auto u : adj[pick])
      if (colour[u] >= 0) forbidden |= std::uint64_t{1} << colour[u];
    for (std::size_t c = 0; c <= used && c < 64; ++c) {
      if (forbidden >> c & 1) continue;
      const std::size_t next_used = std::max(used, c + 1);
      if (next_used >= best) break;
      colour[pick] = static_cast<int>(c);
      search(coloured + 1, next_used);
      colour[pick] = -1;
    }
  };
  search(0, 0);
  return best;
}

}  // namespace detail

/// Clique number, maximum degree and chromatic number. The chromatic number
/// is exact per connected component of at most `exact_limit` vertices and a
/// DSATUR upper bound otherwise (flagged by chromatic_exact = false).
inline GraphStats graph_stats(const Graph& g, std::size_t exact_limit = kDefaultExactChromaticLimit) {
  const auto adj = detail::sorted_adjacency(g);
  GraphStats s;
  for (const auto& a : adj) s.max_degree = std::max(s.max_degree, a.size());
  UnionFind uf(g.n_vertices);
  for (auto [i, j] : g.edges) uf.unite(i, j);
  std::vector<std::vector<std::uint32_t>> comps(g.n_vertices);
  for (std::uint32_t v = 0; v < g.n_vertices; ++v) comps[uf.find(v)].push_back(v);
  std::vector<std::uint32_t> local(g.n_vertices);
  for (const auto& comp : comps) {
    if (comp.empty()) continue;
    for (std::uint32_t i = 0; i < comp.size(); ++i) local[comp[i]] = i;
    std::vector<std::vector<std::uint32_t>> sub(comp.size());
    for (std::uint32_t i = 0; i < comp.size(); ++i) {
      for (auto u : adj[comp[i]]) sub[i].push_back(local[u]);
      std::sort(sub[i].begin(), sub[i].end());
    }
    const std::size_t omega = detail::max_clique(sub);
    s.clique_number = std::max(s.clique_number, omega);
    std::vector<std::uint32_t> verts(comp.size());
    std::iota(verts.begin(), verts.end(), 0);
    std::size_t chi;
    if (comp.size() <= exact_limit) {
      bool exact = true;
      chi = detail::chromatic_exact(sub, verts, omega, exact);
      s.chromatic_exact &= exact;
    } else {
      chi = detail::dsatur_greedy(sub, verts);
      s.chromatic_exact &= chi == omega;
    }
    s.chromatic_number = std::max(s.chromatic_number, chi);
  }
  if (!(s.clique_number <= s.chromatic_number && s.chromatic_number <= s.max_degree + 1) && g.n_vertices > 0)
    throw Error("graph_stats: sandwich inequality violated");
  return s;
}

struct ScalingRow {
  std::int64_t n = 0;
  double radius = 0;
  EstimateWithError clique, max_degree, chromatic, edges;
  double p_clique_below_k = 0;
  bool chromatic_exact = true;
};

/// Statistics of rgg(Phi restricted to W_n, r_n) for W_n = [-n^(1/d)/2, n^(1/d)/2)^d
/// (Euclidean). p_clique_below_k is the fraction of replications with
/// clique number < k.
inline std::vector<ScalingRow> scaling_experiment(const GeneratorSpec& spec, const std::function<double(double)>& r_rule,
                                                  std::span<const std::int64_t> n_list, int k, std::size_t reps,
                                                  const RandomStream& stream, std::size_t dim = 2,
                                                  std::size_t exact_limit = kDefaultExactChromaticLimit) {
  if (reps < 1) throw InvalidArgument("scaling_experiment: reps must be >= 1");
  std::vector<ScalingRow> rows;
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    const std::int64_t n = n_list[idx];
    if (n < 1) throw InvalidArgument("scaling_experiment: n must be >= 1");
    ScalingRow row;
    row.n = n;
    row.radius = r_rule(static_cast<double>(n));
    if (!(row.radius > 0)) throw InvalidArgument("scaling_experiment: r_n must be positive");
    const Window w = Window::centered_cube(dim, std::pow(static_cast<double>(n), 1.0 / static_cast<double>(dim)),
                                           Metric::euclidean);
    const auto stats = parallel_map(reps, [&](std::size_t rep) {
      const auto g = rgg(sample(spec, w, stream.derive(idx).derive(rep)), row.radius);
      return std::pair{graph_stats(g, exact_limit), static_cast<double>(g.edges.size())};
    });
    std::vector<double> c, d, x, e, below;
    for (const auto& [s, edges] : stats) {
      c.push_back(static_cast<double>(s.clique_number));
      d.push_back(static_cast<double>(s.max_degree));
      x.push_back(static_cast<double>(s.chromatic_number));
      e.push_back(edges);
      below.push_back(static_cast<int>(s.clique_number) < k ? 1.0 : 0.0);
      row.chromatic_exact &= s.chromatic_exact;
    }
    row.clique = summarize(c);
    row.max_degree = summarize(d);
    row.chromatic = summarize(x);
    row.edges = summarize(e);
    row.p_clique_below_k = mean_of(below);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ppclust

#endif  // PPCLUST_GRAPHS_HPP
