#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "ppclust/procgen.hpp"
#include "ppclust/stats.hpp"

using namespace ppclust;
using Catch::Approx;

namespace {

// P(k+1, x) through the Poisson-CDF identity 1 - e^{-x} sum_{j<=k} x^j / j!,
// independent of the incomplete-gamma routine used by the sampler.
double ginibre_expected_count_oracle(std::size_t rank, double radius) {
  const double x = radius * radius;
  double total = 0;
  for (std::size_t k = 0; k < rank; ++k) {
    double term = std::exp(-x), cdf = 0;
    for (std::size_t j = 0; j <= k; ++j) {
      cdf += term;
      term *= x / static_cast<double>(j + 1);
    }
    total += 1 - cdf;
  }
  return total;
}

std::vector<double> counts(const GeneratorSpec& spec, const Window& w, std::size_t reps, std::uint64_t seed) {
  std::vector<double> c;
  for (std::size_t r = 0; r < reps; ++r) c.push_back(static_cast<double>(sample(spec, w, RandomStream(seed).derive(r)).size()));
  return c;
}

std::size_t count_in_box(const PointPattern& p, const Point& lo, double side) {
  std::size_t n = 0;
  for (const auto& x : p.points) {
    bool in = true;
    for (std::size_t i = 0; i < x.dim(); ++i) in = in && x[i] >= lo[i] && x[i] < lo[i] + side;
    n += in;
  }
  return n;
}

}  // namespace

TEST_CASE("closed-form intensities", "[procgen]") {
  CHECK(intensity(SquareLattice{0.5, true}).value == Approx(4));
  CHECK(intensity(SquareLattice{0.5, true}, 3).value == Approx(8));
  CHECK(intensity(HexLattice{1, true}).value == Approx(1.1547005383792517));
  CHECK(intensity(MaternCluster{2, 3, 0.1}).value == Approx(6));
  CHECK(intensity(GinibreTruncated{40, 3}).value == Approx(1 / std::numbers::pi));
  CHECK(intensity(BernoulliLattice{1, 0.3, true}).value == Approx(0.3));
  CHECK(intensity(PerturbedLattice{1, CountDistribution::geometric(0.5), {}, LatticeKind::square}).value == Approx(1));
  CHECK(intensity(PerturbedLattice{1, CountDistribution::binomial(1, 1), {}, LatticeKind::hex}).value ==
        Approx(2 / std::sqrt(3.0)));
  CHECK(intensity(MixedPoisson{{0.25, 0.75}, {1, 3}, std::nullopt, 1}).value == Approx(2.5));
  CHECK(intensity(LogGaussianCox{0.1, 0.5, 1, 8}).value == Approx(std::exp(0.35)));
}

TEST_CASE("invalid specs are rejected", "[procgen]") {
  const Window w = Window::cube(2, 10);
  CHECK_THROWS_AS(sample(HomogeneousPoisson{-1}, w, RandomStream(1)), InvalidArgument);
  CHECK_THROWS_AS(sample(GinibreTruncated{10, 4}, w, RandomStream(1)), InvalidArgument);  // R^2 > N
  CHECK_THROWS_AS(sample(GinibreTruncated{kMaxGinibreRank + 1, 3}, w, RandomStream(1)), InvalidArgument);
  CHECK_THROWS_AS(sample(GinibreTruncated{40, 3}, Window::cube(2, 5), RandomStream(1)), InvalidArgument);
  CHECK_THROWS_AS(sample(HexLattice{1, true}, Window::cube(3, 4), RandomStream(1)), InvalidArgument);
  CHECK_THROWS_AS(sample(MaternCluster{1, 0, 0.1}, w, RandomStream(1)), InvalidArgument);
  CHECK_THROWS_AS(sample(NeymanScott{1, CountDistribution::poisson(2), Displacement::in_cell()}, w, RandomStream(1)),
                  InvalidArgument);
}

TEST_CASE("simple perturbed lattice has one point per site", "[procgen]") {
  const Window w = Window::cube(2, 10);
  const PerturbedLattice spec{1, CountDistribution::binomial(1, 1), Displacement::in_cell(), LatticeKind::square};
  for (int r = 0; r < 20; ++r) {
    auto p = sample(spec, w, RandomStream(5).derive(r));
    CHECK(p.size() == 100);
    p.validate();
    // Every unit box [i,i+1)x[j,j+1) meets at most four cells of the shifted
    // lattice, and the cells tile the torus with exactly one point each.
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) CHECK(count_in_box(p, Point{double(i), double(j)}, 1) <= 4);
  }
}

TEST_CASE("hex lattice geometry", "[procgen]") {
  const Window w(Point{0, 0}, Point{10, 10 * std::sqrt(3.0) / 2}, Metric::periodic);
  auto p = sample(HexLattice{1, false}, w, RandomStream(1));
  CHECK(p.size() == 100);
  // nearest-neighbour distance of the unshifted hex lattice is the spacing
  for (std::size_t i = 0; i < p.size(); ++i) {
    double best = 1e9;
    for (std::size_t j = 0; j < p.size(); ++j)
      if (i != j) best = std::min(best, distance(p.points[i], p.points[j], w));
    CHECK(best == Approx(1).epsilon(1e-9));
  }
  const PerturbedLattice hexpert{1, CountDistribution::binomial(1, 1), Displacement::in_cell(), LatticeKind::hex};
  CHECK(sample(hexpert, w, RandomStream(4)).size() == 100);
}

TEST_CASE("empty replication yields empty patterns", "[procgen]") {
  const PerturbedLattice spec{1, CountDistribution::deterministic(0), Displacement::in_cell(), LatticeKind::square};
  for (int r = 0; r < 10; ++r) CHECK(sample(spec, Window::cube(2, 8), RandomStream(2).derive(r)).empty());
}

TEST_CASE("Bernoulli lattice with p=1 equals the stationary lattice", "[procgen]") {
  for (Metric m : {Metric::periodic, Metric::euclidean}) {
    const Window w = Window::cube(2, 7.5, m);
    for (int r = 0; r < 10; ++r) {
      const auto a = sample(SquareLattice{0.7, true}, w, RandomStream(3).derive(r));
      const auto b = sample(BernoulliLattice{0.7, 1.0, true, LatticeKind::square}, w, RandomStream(3).derive(r));
      CHECK(a.points == b.points);
    }
  }
}

TEST_CASE("sampling is deterministic per stream and canonical", "[procgen]") {
  const Window w = Window::cube(2, 10);
  const GeneratorSpec spec = ThomasCluster{0.5, 4, 0.3};
  const auto a = sample(spec, w, RandomStream(77).derive(4));
  const auto b = sample(spec, w, RandomStream(77).derive(4));
  CHECK(a.points == b.points);
  CHECK(std::is_sorted(a.points.begin(), a.points.end()));
  CHECK(a.points != sample(spec, w, RandomStream(77).derive(5)).points);
}

TEST_CASE("mean count smoke test for every family", "[procgen][smoke]") {
  const Window w = Window::cube(2, 8);
  const Window we = w.with_metric(Metric::euclidean);
  const std::vector<GeneratorSpec> specs = {
      HomogeneousPoisson{1.5},
      SquareLattice{0.5, true},
      HexLattice{0.5, true},
      BernoulliLattice{0.5, 0.4, true, LatticeKind::square},
      BinomialProcess{37},
      PerturbedLattice{1, CountDistribution::poisson(1), Displacement::in_cell(), LatticeKind::square},
      PerturbedLattice{1, CountDistribution::geometric(0.5), Displacement::gaussian(0.3), LatticeKind::square},
      PerturbedLattice{0.8, CountDistribution::binomial(2, 0.5), Displacement::in_ball(0.2), LatticeKind::hex},
      MaternCluster{0.5, 4, 0.3},
      ThomasCluster{0.5, 4, 0.2},
      NeymanScott{0.5, CountDistribution::negbinomial(2, 0.5), Displacement::gaussian(0.2)},
      MixedPoisson{{0.5, 0.5}, {0.5, 1.5}, std::nullopt, 1},
      MixedPoisson{{}, {}, CountDistribution::poisson(2), 0.5},
      LogGaussianCox{-0.2, 0.4, 1.0, 8},
      GinibreTruncated{30, 3},
  };
  for (const auto& spec : specs) {
    for (const Window* win : {&w, &we}) {
      if (std::holds_alternative<HexLattice>(spec) && win->metric() == Metric::periodic) continue;  // seam
      INFO(family_name(spec) << (win->metric() == Metric::periodic ? " periodic" : " euclidean"));
      const auto c = counts(spec, *win, 500, 1234);
      const auto e = summarize(c);
      const double expected = expected_count(spec, *win);
      if (e.std_error == 0) {
        CHECK(std::abs(e.value - expected) <= 0.05 * expected + 1);
      } else {
        CHECK(std::abs(e.value - expected) <= 4 * e.std_error);
      }
    }
  }
}

TEST_CASE("Poisson-replicated lattice has Poisson box counts", "[procgen]") {
  // Box counts of a Poisson process: P(N=0) = e^{-|B|}, Var N = E N = |B|.
  const Window w = Window::cube(2, 10);
  const PerturbedLattice spec{1, CountDistribution::poisson(1), Displacement::in_cell(), LatticeKind::square};
  const double side = 1.7, area = side * side;
  const std::size_t reps = 4000;
  std::vector<double> n, zero;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto p = sample(spec, w, RandomStream(21).derive(r));
    const double c = static_cast<double>(count_in_box(p, Point{2.3, 4.1}, side));
    n.push_back(c);
    zero.push_back(c == 0);
  }
  const auto m = summarize(n);
  CHECK(std::abs(m.value - area) <= 3 * m.std_error);
  double var = 0;
  for (double c : n) var += (c - m.value) * (c - m.value);
  var /= static_cast<double>(reps - 1);
  // SE of the sample variance of Poisson(mu): sqrt((mu + 2 mu^2) / n)
  CHECK(std::abs(var - area) <= 4 * std::sqrt((area + 2 * area * area) / reps));
  const auto z = summarize(zero);
  CHECK(std::abs(z.value - std::exp(-area)) <= 4 * binomial_se(std::exp(-area), reps));
}

TEST_CASE("truncated Ginibre count matches the incomplete-gamma oracle", "[procgen][ginibre]") {
  const GinibreTruncated spec{40, 3};
  const double oracle = ginibre_expected_count_oracle(40, 3);
  CHECK(oracle == Approx(9).margin(1e-6));
  CHECK(expected_count(spec, Window::cube(2, 8)) == Approx(oracle).epsilon(1e-12));
  const Window w = Window::cube(2, 8, Metric::euclidean);
  std::vector<double> c;
  for (int r = 0; r < 400; ++r) {
    const auto p = sample(spec, w, RandomStream(8).derive(r));
    c.push_back(static_cast<double>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(std::hypot(p.points[i][0] - 4, p.points[i][1] - 4) <= 3 + 1e-12);
      for (std::size_t j = i + 1; j < p.size(); ++j) CHECK(euclidean_distance(p.points[i], p.points[j]) > 1e-9);
    }
  }
  const auto e = summarize(c);
  CHECK(std::abs(e.value - oracle) <= 3 * e.std_error + 1e-12);
}

TEST_CASE("Ginibre radial density follows the kernel diagonal", "[procgen][ginibre]") {
  const GinibreTruncated spec{40, 3};
  const Window w = Window::cube(2, 8, Metric::euclidean);
  std::vector<double> inner;
  for (int r = 0; r < 1500; ++r) {
    const auto p = sample(spec, w, RandomStream(81).derive(r));
    double c = 0;
    for (const auto& x : p.points) c += std::hypot(x[0] - 4, x[1] - 4) < 1;
    inner.push_back(c);
  }
  // rho(z) = sum_k |z|^{2k} e^{-|z|^2} / (pi k!) for k < N: integral over r<1 is
  // sum_k P(k+1, 1); independent of the disk radius because eigenvalues cancel.
  const double expect = ginibre_expected_count_oracle(40, 1);
  const auto e = summarize(inner);
  CHECK(std::abs(e.value - expect) <= 4 * e.std_error);
}
