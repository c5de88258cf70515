// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "ppclust/experiments.hpp"
#include "ppclust/parallel.hpp"

using namespace ppclust;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Report {
 public:
  void expect(Outcome& o, bool ok, const std::string& what) {
    if (!ok && o.pass) o.detail = what;
    o.pass = o.pass && ok;
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

bool within(const EstimateWithError& e, double target, double z = 3) {
  return std::abs(e.value - target) <= z * e.std_error;
}

GeneratorSpec lattice_with(CountDistribution d, LatticeKind kind = LatticeKind::square, double spacing = 1) {
  return PerturbedLattice{spacing, std::move(d), Displacement::in_cell(), kind};
}

// ---------------------------------------------------------------------------

Outcome poisson_k_function() {
  Outcome o;
  Report r;
  const std::vector<double> radii{0.2, 0.4, 0.6, 0.8, 1.0};
  const auto k = ripley_k(HomogeneousPoisson{1}, Window::cube(2, 20), radii, 200, RandomStream(101));
  double worst = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double truth = std::numbers::pi * radii[i] * radii[i];
    worst = std::max(worst, std::abs(k.estimates[i].value - truth) / k.estimates[i].std_error);
    r.expect(o, within(k.estimates[i], truth), "r=" + fmt(radii[i]) + " off by more than 3 SE");
  }
  const double rel = std::abs(k.estimates.back().value - std::numbers::pi) / std::numbers::pi;
  r.expect(o, rel <= 0.05, "relative error at r=1 is " + fmt(rel));
  if (o.pass) o.detail = "max |z| " + fmt(worst, 3) + ", relative error at r=1 " + fmt(rel, 3);
  return o;
}

Outcome poisson_voids_and_moments() {
  Outcome o;
  Report r;
  const Window w = Window::cube(2, 10);
  const GeneratorSpec pois = HomogeneousPoisson{1};
  const auto v = void_probability(pois, w, Region::ball(0.5), 64, 400, RandomStream(201));
  r.expect(o, within(v, std::exp(-std::numbers::pi / 4)), "void probability " + fmt(v.value));
  const auto a2 = factorial_moment(pois, w, 1, 2, 64, 400, RandomStream(202));
  r.expect(o, within(a2, 1), "second factorial moment " + fmt(a2.value));
  auto f = [](const Point& x) { return x[0] < 1 && x[1] < 1 ? 1.0 : 0.0; };
  const auto lm = laplace_functional(pois, Window::cube(2, 4), f, LaplaceSign::minus, 4000, RandomStream(203));
  r.expect(o, within(lm, std::exp(-(1 - std::exp(-1.0)))), "Laplace functional (minus) " + fmt(lm.value));
  const auto lp = laplace_functional(pois, Window::cube(2, 4), f, LaplaceSign::plus, 4000, RandomStream(204));
  r.expect(o, within(lp, std::exp(std::numbers::e - 1)), "Laplace functional (plus) " + fmt(lp.value));
  if (o.pass)
    o.detail = "v=" + fmt(v.value) + " a2=" + fmt(a2.value) + " L-=" + fmt(lm.value) + " L+=" + fmt(lp.value);
  return o;
}

Outcome exact_cx_chains() {
  Outcome o;
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  const std::int64_t rs[] = {2, 4};
  const auto sub = sub_poisson_chain(1, 6, 4, rs);
  const std::vector<double> w{0.5, 0.5}, p{1, 1.0 / 3};
  const auto super = super_poisson_chain(1, 1, 2, w, p);
  std::size_t links = 0, reversed = 0, equal_laws = 0;
  for (const auto* chain : {&sub, &super})
    for (std::size_t i = 0; i + 1 < chain->size(); ++i) {
      const auto& a = (*chain)[i];
      const auto& b = (*chain)[i + 1];
      const auto v = check_cx(a, b);
      ++links;
      r.expect(o, v.outcome == CxOutcome::holds && v.min_slack >= -1e-12,
               describe(a) + " <=cx " + describe(b) + " gave " + to_string(v.outcome));
      // a link between equal laws cannot fail when reversed
      const auto back = check_cx(b, a);
      if (back.outcome == CxOutcome::holds && back.min_slack >= -1e-12) {
        bool same = true;
        for (std::int64_t k = 0; k < 200; ++k) same = same && std::abs(pmf(a, k) - pmf(b, k)) < 1e-12;
        ++equal_laws;
        r.expect(o, same, "reversed " + describe(b) + " <=cx " + describe(a) + " did not fail");
      } else {
        ++reversed;
        r.expect(o, back.outcome == CxOutcome::fails, "reversed pair verdict " + to_string(back.outcome));
      }
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.expect(o, secs < 1, "took " + fmt(secs) + " s");
  r.expect(o, sub.size() >= 3 && super.size() == 5, "unexpected chain lengths");
  if (o.pass)
    o.detail = std::to_string(links) + " links hold, " + std::to_string(reversed) + " reversals fail, " +
               std::to_string(equal_laws) + " link between identical laws, " + fmt(secs * 1000, 3) + " ms";
  return o;
}

Outcome poisson_replicated_lattice() {
  Outcome o;
  Report r;
  const Window w = Window::cube(2, 20);
  const std::vector<double> scales{0.25, 0.5, 1, 2};
  const auto lat = lattice_with(CountDistribution::poisson(1));
  double worst = 0;
  std::uint64_t seed = 301;
  for (Statistic s : {Statistic::ripley_k, Statistic::voids, Statistic::factorial_moments}) {
    const auto rep = compare_two(lat, HomogeneousPoisson{1}, w, s, scales, 200, RandomStream(seed++), 2);
    for (const auto& row : rep.per_scale) {
      worst = std::max(worst, std::abs(row.z_score));
      r.expect(o, std::abs(row.z_score) <= 3, to_string(s, 2) + " at scale " + fmt(row.scale) + ": z=" + fmt(row.z_score));
    }
  }
  if (o.pass) o.detail = "max |z| " + fmt(worst, 3);
  return o;
}

Outcome weak_verdicts() {
  Outcome o;
  Report r;
  const Window w = Window::cube(2, 20);
  const std::vector<double> scales{0.25, 0.5, 1, 2};
  using Kind = Verdict::Kind;
  for (const auto& rep : weak_poisson_test(lattice_with(CountDistribution::binomial(1, 1)), w, scales, 3, 200, RandomStream(401)))
    r.expect(o, rep.verdict.kind == Kind::consistent_sub,
             "simple perturbed lattice " + to_string(rep.statistic, rep.k) + ": " + to_string(rep.verdict));
  for (const auto& rep : weak_poisson_test(lattice_with(CountDistribution::geometric(0.5)), w, scales, 3, 200, RandomStream(402)))
    r.expect(o, rep.verdict.kind == Kind::consistent_super,
             "geometric perturbed lattice " + to_string(rep.statistic, rep.k) + ": " + to_string(rep.verdict));
  // cluster radius 0.1: boxes up to the cluster diameter
  const std::vector<double> small{0.1, 0.2};
  for (const auto& rep : weak_poisson_test(MaternCluster{0.2, 5, 0.1}, w, small, 3, 400, RandomStream(403), 256))
    if (rep.statistic == Statistic::factorial_moments)
      r.expect(o, rep.verdict.kind == Kind::consistent_super,
               "Matern " + to_string(rep.statistic, rep.k) + ": " + to_string(rep.verdict));
  if (o.pass) o.detail = "sub, super and cluster verdicts as expected";
  return o;
}

Outcome two_component_curves() {
  Outcome o;
  Report r;
  const double lambda = 2 / std::sqrt(3.0);
  const Window w = Window::cube(2, 30, Metric::euclidean);
  const auto radii = Config::parse_real_list("0.30:0.80:0.025");
  const auto sub = component_fraction_sweep(lattice_with(CountDistribution::binomial(1, 1), LatticeKind::hex), w, radii,
                                            100, RandomStream(501));
  const auto super = component_fraction_sweep(lattice_with(CountDistribution::negbinomial(1, 0.5), LatticeKind::hex),
                                              w, radii, 100, RandomStream(502));
  std::vector<double> below;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (sub.largest_fraction[i].value < super.largest_fraction[i].value) below.push_back(radii[i]);
  std::string a = "(a) sub >= super on " + std::to_string(radii.size() - below.size()) + "/" +
                  std::to_string(radii.size()) + " radii";
  if (!below.empty()) a += ", below at r=" + fmt(below.front()) + ".." + fmt(below.back());
  r.expect(o, below.empty(), a);
  const auto rc = critical_radius(HomogeneousPoisson{lambda}, w, 100, 0.005, RandomStream(503));
  const std::string b = "(b) r_hat " + fmt(rc.value) + " +- " + fmt(rc.std_error, 2);
  r.expect(o, std::abs(rc.value - 0.558) <= 0.05, b);
  o.detail = a + "; " + b;
  return o;
}

Outcome percolation_bounds() {
  Outcome o;
  Report r;
  const Window w = Window::cube(2, 30, Metric::euclidean);
  const double lower = 1 / std::sqrt(std::numbers::pi), upper = std::sqrt(2 * std::log(7.0));
  std::string d;
  std::uint64_t seed = 601;
  for (const auto& [name, spec] : {std::pair<std::string, GeneratorSpec>{"Poisson", HomogeneousPoisson{1}},
                                   {"perturbed lattice", lattice_with(CountDistribution::binomial(1, 1))}}) {
    const auto rc = critical_radius(spec, w, 100, 0.005, RandomStream(seed++));
    const auto b = check_percolation_bounds(rc.value, 1, 2);
    r.expect(o, std::abs(b.lower - lower) < 1e-12 && std::abs(b.upper - upper) < 1e-12, "bound formulas");
    r.expect(o, rc.value + 0.05 >= lower && rc.value <= upper, name + " r_hat " + fmt(rc.value) + " outside bounds");
    d += (d.empty() ? "" : ", ") + name + " " + fmt(rc.value);
  }
  if (o.pass) o.detail = d + " in [" + fmt(lower) + ", " + fmt(upper) + "]";
  return o;
}

Outcome ginibre_signature() {
  Outcome o;
  Report r;
  double oracle = 0;
  for (int k = 1; k <= 40; ++k) oracle += boost::math::gamma_p(static_cast<double>(k), 9.0);
  const Window w = Window::cube(2, 8, Metric::euclidean);
  const std::size_t reps = 500;
  const auto counts = parallel_map(reps, [&](std::size_t i) {
    const auto p = sample(GinibreTruncated{40, 3}, w, RandomStream(701).derive(i));
    std::size_t n = 0;
    for (const auto& x : p.points) n += std::hypot(x[0] - 4, x[1] - 4) <= 3;
    return static_cast<double>(n);
  });
  const auto m = summarize(counts);
  double m2 = 0, m4 = 0;
  for (double c : counts) m2 += (c - m.value) * (c - m.value), m4 += std::pow(c - m.value, 4);
  const double n = static_cast<double>(reps);
  const double var = m2 / (n - 1);
  const double var_se = std::sqrt(std::max(0.0, m4 / n - (m2 / n) * (m2 / n)) / n);
  r.expect(o, within(m, oracle), "mean count " + fmt(m.value) + " vs oracle " + fmt(oracle));
  r.expect(o, var + 3 * var_se < m.value - 3 * m.std_error, "variance " + fmt(var) + " not below mean");
  if (o.pass) o.detail = "mean " + fmt(m.value) + " (oracle " + fmt(oracle) + "), variance " + fmt(var);
  return o;
}

Outcome sinr_reduction() {
  Outcome o;
  Report r;
  const Window w = Window::cube(2, 10, Metric::euclidean);
  const SinrParams base{1, 0.05, 2, 0, ResponseFunction::exponential(1)};
  // l(x) = min(1, e^-x): l^{-1}(TN/P) = log(P/(TN))
  const double rl = std::log(base.power / (base.threshold * base.noise)) / 2;
  r.expect(o, std::abs(base.noise_range() / 2 - rl) < 1e-12, "noise range");
  std::size_t identical = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto b = sample(HomogeneousPoisson{1}, w, RandomStream(801).derive(s));
    const auto i = sample(HomogeneousPoisson{1}, w, RandomStream(802).derive(s));
    const bool same = sinr_graph(b, i, base).edges == gilbert_graph(b, rl).edges;
    identical += same;
    r.expect(o, same, "instance " + std::to_string(s) + " differs from the Gilbert graph");
  }
  const double gammas[] = {0, 1e-4, 5e-4, 1e-3, 5e-3, 0.01, 0.02, 0.05, 0.1, 0.5};
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto b = sample(HomogeneousPoisson{1}, w, RandomStream(803).derive(s));
    std::size_t prev = SIZE_MAX;
    for (double g : gammas) {
      SinrParams prm = base;
      prm.gamma = g;
      const auto e = sinr_graph(b, b, prm).edges.size();
      r.expect(o, e <= prev, "edge count rose at gamma=" + fmt(g));
      prev = e;
    }
  }
  if (o.pass) o.detail = std::to_string(identical) + "/100 identical, monotone on 10 seeds";
  return o;
}

// Dense Gaussian elimination over Z/2.
std::size_t gf2_rank(std::vector<std::vector<char>> m) {
  std::size_t rank = 0;
  const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && !m[piv][c]) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[rank]);
    for (std::size_t i = 0; i < rows; ++i)
      if (i != rank && m[i][c])
        for (std::size_t j = 0; j < cols; ++j) m[i][j] ^= m[rank][j];
    ++rank;
  }
  return rank;
}

std::size_t naive_rank(const SimplicialComplex& c, std::size_t k) {
  if (k == 0 || k >= c.faces.size() || c.faces[k].empty()) return 0;
  const auto& lo = c.faces[k - 1];
  std::vector<std::vector<char>> m(lo.size(), std::vector<char>(c.faces[k].size(), 0));
  for (std::size_t j = 0; j < c.faces[k].size(); ++j)
    for (std::size_t i = 0; i < lo.size(); ++i)
      m[i][j] = std::includes(c.faces[k][j].begin(), c.faces[k][j].end(), lo[i].begin(), lo[i].end());
  return gf2_rank(m);
}

std::size_t union_find_components(const PointPattern& p, double r) {
  std::vector<std::size_t> parent(p.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  std::size_t comps = p.size();
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (euclidean_distance(p.points[i], p.points[j]) <= 2 * r) {
        const auto a = find(i), b = find(j);
        if (a != b) parent[a] = b, --comps;
      }
  return comps;
}

Outcome topology_suite() {
  Outcome o;
  Report r;
  const Window box = Window::cube(2, 4, Metric::euclidean);
  const PointPattern sq{box, {Point{1, 1}, Point{2, 1}, Point{1, 2}, Point{2, 2}}};
  const auto b6 = betti_numbers(cech_complex(sq, 0.6, 2));
  const auto b8 = betti_numbers(cech_complex(sq, 0.8, 2));
  r.expect(o, b6.size() >= 2 && b6[0] == 1 && b6[1] == 1, "square at r=0.6");
  r.expect(o, b8.size() >= 2 && b8[0] == 1 && b8[1] == 0, "square at r=0.8");
  std::size_t instances = 0, oracle = 0, truncated = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto p = sample(BinomialProcess{60}, Window::cube(2, 6, Metric::euclidean), RandomStream(1001).derive(s));
    for (double rad : {0.15, 0.25, 0.35, 0.45, 0.55}) {
      ++instances;
      const auto c = cech_complex(p, rad, kMaxComplexDim);
      const std::string where = "pattern " + std::to_string(s) + " r=" + fmt(rad);
      auto b = betti_numbers(c);
      // Faces above the build dimension exist: the identity is checked on the
      // built skeleton, whose top Betti number is S_top - rank d_top.
      if (!c.complete) {
        ++truncated;
        const std::size_t top = c.faces.size() - 1;
        b.push_back(c.faces[top].size() - boundary_rank(c, top));
      }
      r.expect(o, b[0] == union_find_components(p, rad), where + ": beta_0");
      const auto counts = simplex_counts(c);
      long long chi_s = 0, chi_b = 0;
      for (std::size_t k = 0; k < counts.size(); ++k) chi_s += (k % 2 ? -1 : 1) * static_cast<long long>(counts[k]);
      for (std::size_t k = 0; k < b.size(); ++k) chi_b += (k % 2 ? -1 : 1) * static_cast<long long>(b[k]);
      r.expect(o, chi_s == euler_characteristic(c) && chi_s == chi_b, where + ": Euler identity");
      if (std::accumulate(counts.begin(), counts.end(), std::size_t{0}) <= 200) {
        ++oracle;
        for (std::size_t k = 1; k < c.faces.size(); ++k)
          r.expect(o, boundary_rank(c, k) == naive_rank(c, k), where + ": boundary rank " + std::to_string(k));
      }
    }
  }
  if (o.pass)
    o.detail = std::to_string(instances) + " instances (" + std::to_string(truncated) + " truncated at dimension " +
               std::to_string(kMaxComplexDim) + "), " + std::to_string(oracle) + " checked against the dense rank";
  return o;
}

Outcome concentration() {
  Outcome o;
  Report r;
  const std::int64_t ns[] = {100};
  std::string d;
  std::uint64_t seed = 1101;
  for (const auto& [name, spec] : {std::pair<std::string, GeneratorSpec>{"Poisson", HomogeneousPoisson{1}},
                                   {"perturbed lattice", lattice_with(CountDistribution::binomial(1, 1))}}) {
    const auto row = concentration_check(spec, 0.75, ns, 10000, RandomStream(seed++))[0];
    r.expect(o, !row.skipped, name + " skipped");
    r.expect(o, std::abs(row.bound - 2 * std::exp(-10.0 / 9)) < 1e-12, "bound value");
    r.expect(o, row.empirical <= row.bound, name + " tail above the bound");
    r.expect(o, row.empirical <= 0.01, name + " tail " + fmt(row.empirical) + " above 0.01");
    d += (d.empty() ? "" : ", ") + name + " " + fmt(row.empirical);
  }
  if (o.pass) o.detail = "tails " + d + " (bound " + fmt(2 * std::exp(-10.0 / 9)) + ")";
  return o;
}

using EdgeList = std::vector<std::pair<int, int>>;

bool isomorphic(int k, const std::vector<std::vector<char>>& a, const EdgeList& motif) {
  std::vector<std::vector<char>> m(static_cast<std::size_t>(k), std::vector<char>(static_cast<std::size_t>(k), 0));
  for (auto [u, v] : motif) m[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = m[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int i = 0; i < k && ok; ++i)
      for (int j = i + 1; j < k && ok; ++j) {
        const int pi = perm[static_cast<std::size_t>(i)], pj = perm[static_cast<std::size_t>(j)];
        ok = m[static_cast<std::size_t>(pi)][static_cast<std::size_t>(pj)] == a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

Outcome oracle_equivalence() {
  Outcome o;
  Report r;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Metric metric = s % 2 ? Metric::periodic : Metric::euclidean;
    const Window w = Window::cube(2, 10, metric);
    const auto p = sample(BinomialProcess{static_cast<std::int64_t>(50 + 3 * s)}, w, RandomStream(1201).derive(s));
    const double rad = 0.2 + 0.02 * static_cast<double>(s % 10);
    std::vector<Graph::Edge> brute;
    for (std::uint32_t i = 0; i < p.size(); ++i)
      for (std::uint32_t j = i + 1; j < p.size(); ++j)
        if (distance(p.points[i], p.points[j], w) <= 2 * rad) brute.emplace_back(i, j);
    r.expect(o, gilbert_graph(p, rad).edges == brute, "Gilbert graph instance " + std::to_string(s));
  }
  const std::vector<std::pair<int, EdgeList>> motifs{
      {2, {{0, 1}}},
      {3, {{0, 1}, {1, 2}}},
      {3, {{0, 1}, {1, 2}, {0, 2}}},
      {4, {{0, 1}, {0, 2}, {0, 3}}},
      {4, {{0, 1}, {1, 2}, {2, 3}}},
      {4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}},
      {4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}},
      {5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}}},
  };
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto p = sample(BinomialProcess{30}, Window::cube(2, 3, Metric::euclidean), RandomStream(1202).derive(s));
    const auto g = gilbert_graph(p, 0.35);
    std::vector<std::vector<char>> adj(p.size(), std::vector<char>(p.size(), 0));
    for (auto [i, j] : g.edges) adj[i][j] = adj[j][i] = 1;
    for (const auto& [k, edges] : motifs) {
      std::uint64_t brute = 0;
      std::vector<int> idx(static_cast<std::size_t>(k));
      std::iota(idx.begin(), idx.end(), 0);
      const int n = static_cast<int>(p.size());
      while (true) {
        std::vector<std::vector<char>> sub(static_cast<std::size_t>(k), std::vector<char>(static_cast<std::size_t>(k)));
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b)
            sub[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                adj[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])][static_cast<std::size_t>(idx[static_cast<std::size_t>(b)])];
        brute += isomorphic(k, sub, edges);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      }
      r.expect(o, induced_subgraph_count(g, Motif(k, edges)) == brute,
                 "motif with " + std::to_string(edges.size()) + " edges, pattern " + std::to_string(s));
    }
  }
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto p = sample(BinomialProcess{12}, Window::cube(2, 2, Metric::euclidean), RandomStream(1203).derive(s));
    auto close = [](const Point& a, const Point& b) { return euclidean_distance(a, b) <= 0.8 ? 1.0 : 0.0; };
    const std::size_t n = p.size();
    double l1 = 0, l2 = 0, l3 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      l1 += p.points[i][0] < 1 ? 1 : 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        l2 += close(p.points[i], p.points[j]);
        for (std::size_t k = 0; k < n; ++k)
          if (k != i && k != j)
            l3 += close(p.points[i], p.points[j]) * close(p.points[j], p.points[k]) * close(p.points[i], p.points[k]);
      }
    }
    const double u1 = u_statistic(p, 1, [](std::span<const Point> t) { return t[0][0] < 1 ? 1.0 : 0.0; });
    const double u2 = u_statistic(p, 2, [&](std::span<const Point> t) { return close(t[0], t[1]); });
    const double u3 = u_statistic(p, 3, [&](std::span<const Point> t) { return close(t[0], t[1]) * close(t[1], t[2]) * close(t[0], t[2]); });
    r.expect(o, u1 == l1 && u2 == l2 && u3 == l3, "u-statistic pattern " + std::to_string(s));
  }
  if (o.pass) o.detail = "50 Gilbert graphs, 32 motif counts, 15 u-statistics";
  return o;
}

Outcome determinism() {
  Outcome o;
  Report r;
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"sample", "[generator]\nfamily = thomas\nparent_intensity = 0.3\nmean_cluster_size = 4\nsigma = 0.2\n[window]\nside = 6\n[run]\nreplications = 3\n"},
      {"summary", "[generator]\nfamily = matern\nparent_intensity = 0.25\nmean_cluster_size = 4\ncluster_radius = 0.3\n[window]\nside = 8\n[experiment]\nradii = 0.25,0.5,1\n[run]\nreplications = 8\n"},
      {"compare", "[generator]\nfamily = perturbed_lattice\nreplication = geometric(0.5)\n[window]\nside = 8\n[run]\nreplications = 20\n"},
      {"percolation", "[generator]\nfamily = poisson\n[generator2]\nfamily = perturbed_lattice\n[window]\nside = 10\nmetric = euclidean\n[experiment]\nradii = 0.4:0.7:0.1\ncritical = true\n[run]\nreplications = 10\n"},
      {"coverage", "[generator]\nfamily = square_lattice\n[generator2]\nfamily = poisson\n[experiment]\ngrid_n = 30\nlevels = 5,8\n[run]\nreplications = 4\n"},
      {"sinr", "[generator]\nfamily = poisson\n[window]\nside = 6\n[run]\nreplications = 4\n"},
      {"graph", "[generator]\nfamily = poisson\n[experiment]\nn_list = 20,200\nradius_exponent = -0.5\nk = 3\n[run]\nreplications = 6\n"},
      {"complex", "[generator]\nfamily = binomial\nn = 40\n[window]\nside = 3\n[experiment]\nn_list = 30,100\nradius_exponent = -0.3\n[run]\nreplications = 4\n"},
      {"kernel_chain", ""},
  };
  const unsigned saved = thread_count();
  std::size_t files = 0;
  std::ostringstream log;
  for (const auto& [name, text] : runs) {
    set_thread_count(1);
    Config c1 = Config::parse(text, name + ".ini");
    const auto first = cli::execute(name, c1, true, log);
    set_thread_count(8);
    Config c8 = Config::parse(first[0].content, "manifest.ini");
    const auto again = cli::execute(name, c8, true, log);
    r.expect(o, first.size() == again.size(), name + ": artifact lists differ");
    for (std::size_t i = 0; i < std::min(first.size(), again.size()); ++i) {
      r.expect(o, first[i].name == again[i].name && first[i].content == again[i].content, name + ": " + first[i].name + " differs");
      files += first[i].name.ends_with(".csv");
    }
  }
  set_thread_count(saved);
  if (o.pass) o.detail = std::to_string(runs.size()) + " experiments, " + std::to_string(files) + " CSVs identical at 1 and 8 threads";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"Poisson K-function", poisson_k_function},
      {"Poisson voids, moments and Laplace functional", poisson_voids_and_moments},
      {"exact convex-order chains", exact_cx_chains},
      {"Poisson-replicated lattice equals Poisson", poisson_replicated_lattice},
      {"weak sub/super-Poisson verdicts", weak_verdicts},
      {"two-component curves and critical radius at 2/sqrt(3)", two_component_curves},
      {"percolation radius bounds", percolation_bounds},
      {"Ginibre sub-Poisson signature", ginibre_signature},
      {"SINR reduction and monotonicity", sinr_reduction},
      {"topology suite", topology_suite},
      {"concentration", concentration},
      {"oracle equivalence", oracle_equivalence},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
