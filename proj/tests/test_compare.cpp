#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <boost/math/distributions/poisson.hpp>

#include "ppclust/compare.hpp"

using namespace ppclust;
using Kind = Verdict::Kind;

namespace {

const Window kWin = Window::cube(2, 12);
const double kScales[] = {0.25, 0.5, 1, 2};

GeneratorSpec lattice_with(CountDistribution kernel) {
  return PerturbedLattice{1, std::move(kernel), Displacement::in_cell()};
}

std::vector<ScaleRow> rows_from(std::initializer_list<double> zs) {
  std::vector<ScaleRow> r;
  double s = 1;
  for (double z : zs) r.push_back({s++, 0, 1, 0, z});
  return r;
}

std::vector<ScaleRow> negated(std::vector<ScaleRow> r) {
  for (auto& x : r) x.z_score = -x.z_score;
  return r;
}

}  // namespace

TEST_CASE("verdict rule", "[compare]") {
  CHECK(verdict_from(rows_from({0.5, -1.9, 1.2})).kind == Kind::inconclusive);
  CHECK(verdict_from(rows_from({-3, -10, 1})).kind == Kind::consistent_sub);
  CHECK(verdict_from(rows_from({3, 10, -1})).kind == Kind::consistent_super);
  CHECK(verdict_from(rows_from({8, 9, -3})).kind == Kind::inconclusive);
  const auto v = verdict_from(rows_from({8, 9, -5}));
  CHECK(v.kind == Kind::violated);
  CHECK(v.scale == 3);
  CHECK(verdict_from(rows_from({-INFINITY, -2.5})).kind == Kind::consistent_sub);
}

TEST_CASE("verdict rule is symmetric under sign flip", "[compare][property]") {
  auto eng = RandomStream(1).engine();
  std::normal_distribution<double> z(0, 4);
  for (int t = 0; t < 2000; ++t) {
    std::vector<ScaleRow> r;
    for (int i = 0; i < 4; ++i) r.push_back({double(i), 0, 1, 0, z(eng)});
    const auto a = verdict_from(r), b = verdict_from(negated(r));
    if (a.kind == Kind::consistent_sub) CHECK(b.kind == Kind::consistent_super);
    else if (a.kind == Kind::consistent_super) CHECK(b.kind == Kind::consistent_sub);
    else CHECK(a == b);
  }
}

TEST_CASE("Poisson falling factorial variance", "[compare]") {
  // Var N = mu, Var N(N-1) = 4 mu^3 + 2 mu^2.
  CHECK(detail::poisson_falling_factorial_variance(1.7, 1) == Catch::Approx(1.7));
  CHECK(detail::poisson_falling_factorial_variance(1.7, 2) == Catch::Approx(4 * std::pow(1.7, 3) + 2 * 1.7 * 1.7));
}

TEST_CASE("weak sub and super Poisson verdicts of perturbed lattices", "[compare][statistical]") {
  const auto sub = weak_poisson_test(lattice_with(CountDistribution::binomial(1, 1)), kWin, kScales, 3, 200,
                                     RandomStream(2));
  REQUIRE(sub.size() == 3);
  for (const auto& r : sub) CHECK(r.verdict.kind == Kind::consistent_sub);

  const auto super = weak_poisson_test(lattice_with(CountDistribution::geometric(0.5)), kWin, kScales, 3, 200,
                                       RandomStream(3));
  for (const auto& r : super) CHECK(r.verdict.kind == Kind::consistent_super);
}

TEST_CASE("Poisson is inconclusive against itself", "[compare][statistical]") {
  const auto rep = weak_poisson_test(HomogeneousPoisson{1}, kWin, kScales, 2, 200, RandomStream(4));
  for (const auto& r : rep) {
    CHECK(r.verdict.kind != Kind::violated);
    for (const auto& row : r.per_scale) CHECK(std::abs(row.z_score) < kViolationZ);
  }
  const auto two = compare_two(HomogeneousPoisson{1}, HomogeneousPoisson{1}, kWin, Statistic::voids, kScales, 200,
                               RandomStream(5));
  CHECK(two.verdict.kind == Kind::inconclusive);
}

TEST_CASE("compare_two orders binomial below Poisson replication", "[compare][statistical]") {
  const auto a = lattice_with(CountDistribution::binomial(2, 0.25));
  const auto b = lattice_with(CountDistribution::poisson(0.5));
  const double scales[] = {0.5, 1, 2};
  for (Statistic s : {Statistic::voids, Statistic::factorial_moments}) {
    const auto ab = compare_two(a, b, kWin, s, scales, 300, RandomStream(6));
    CHECK(ab.verdict.kind == Kind::consistent_sub);
    const auto ba = compare_two(b, a, kWin, s, scales, 300, RandomStream(6));
    CHECK(ba.verdict.kind == Kind::consistent_super);
  }
}

TEST_CASE("Matern exceeds Poisson on short-range second moments", "[compare][statistical]") {
  const double scales[] = {0.1};
  const auto r = compare_two(MaternCluster{1, 1, 0.1}, HomogeneousPoisson{1}, Window::cube(2, 10),
                             Statistic::factorial_moments, scales, 400, RandomStream(7), 2, 256);
  CHECK(r.verdict.kind == Kind::consistent_super);
}

TEST_CASE("compare_two requires matching intensities", "[compare]") {
  const double scales[] = {1};
  CHECK_THROWS_AS(compare_two(HomogeneousPoisson{1}, HomogeneousPoisson{1.05}, kWin, Statistic::voids, scales, 2,
                              RandomStream(0)),
                  InvalidArgument);
  CHECK_NOTHROW(compare_two(HomogeneousPoisson{1}, HomogeneousPoisson{1.005}, kWin, Statistic::voids, scales, 2,
                            RandomStream(0)));
}

TEST_CASE("concentration of Poisson and lattice counts", "[compare][statistical]") {
  const std::int64_t ns[] = {100};
  const auto p = concentration_check(HomogeneousPoisson{1}, 0.75, ns, 2000, RandomStream(8));
  REQUIRE(p.size() == 1);
  CHECK(p[0].bound == Catch::Approx(2 * std::exp(-10.0 / 9)));
  CHECK(p[0].holds);
  // Exact tail P(|N - 100| >= 100^0.75) for N ~ Poisson(100).
  boost::math::poisson_distribution<double> pois(100);
  const double dev = std::pow(100.0, 0.75);
  const double exact = boost::math::cdf(pois, std::floor(100 - dev)) + boost::math::cdf(complement(pois, std::ceil(100 + dev) - 1));
  CHECK(std::abs(p[0].empirical - exact) <= 4 * binomial_se(exact, 2000) + 1e-3);

  const auto l = concentration_check(lattice_with(CountDistribution::binomial(1, 1)), 0.75, ns, 500, RandomStream(9));
  CHECK(l[0].empirical == 0);
  CHECK(l[0].holds);

  const auto guard = concentration_check(HomogeneousPoisson{1}, 0.999, ns, 1000, RandomStream(10));
  CHECK(guard[0].skipped);

  CHECK_THROWS_AS(concentration_check(HomogeneousPoisson{2}, 0.75, ns, 10, RandomStream(0)), InvalidArgument);
  const std::int64_t small[] = {10};
  CHECK_THROWS_AS(concentration_check(HomogeneousPoisson{1}, 0.75, small, 10, RandomStream(0)), InvalidArgument);
}

TEST_CASE("reports are reproducible", "[compare]") {
  const auto a = weak_poisson_test(MaternCluster{1, 2, 0.2}, kWin, kScales, 2, 20, RandomStream(11));
  const auto b = weak_poisson_test(MaternCluster{1, 2, 0.2}, kWin, kScales, 2, 20, RandomStream(11));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t s = 0; s < a[i].per_scale.size(); ++s) CHECK(a[i].per_scale[s].estimate == b[i].per_scale[s].estimate);
}
