#ifndef PPCLUST_DISTS_HPP
#define PPCLUST_DISTS_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "core.hpp"
#include "format.hpp"
#include "random.hpp"

namespace ppclust {

class CountDistribution;

// Parameterizations follow the replication kernels of the perturbed-lattice
// constructions:
//   Binomial(n,p):        C(n,i) p^i (1-p)^{n-i}
//   NegBinomial(r,p):     C(r+i-1,i) p^i (1-p)^r,  mean r p / (1-p)
//   Geometric(p):         p (1-p)^i,               mean 1/p - 1
//   Hypergeometric(n,m,k): C(m,i) C(n-m,k-i) / C(n,k), mean k m / n
struct Deterministic { std::int64_t k = 0; };
struct Binomial { std::int64_t n = 0; double p = 0; };
struct Poisson { double lambda = 0; };
struct NegBinomial { double r = 1; double p = 0; };
struct Geometric { double p = 1; };
struct Hypergeometric { std::int64_t n = 0, m = 0, k = 0; };
struct Mixture {
  std::vector<double> weights;
  std::vector<CountDistribution> components;
};

inline constexpr double kDefaultTruncation = 1e-14;

/// Exact law on the non-negative integers.
class CountDistribution {
 public:
  using Variant = std::variant<Deterministic, Binomial, Poisson, NegBinomial, Geometric, Hypergeometric, Mixture>;

  CountDistribution() : v_(Deterministic{0}) {}
  CountDistribution(Variant v, double truncation_tolerance = kDefaultTruncation)
      : v_(std::move(v)), tol_(truncation_tolerance) {
    validate();
  }

  static CountDistribution deterministic(std::int64_t k) { return {Deterministic{k}}; }
  static CountDistribution binomial(std::int64_t n, double p) { return {Binomial{n, p}}; }
  static CountDistribution poisson(double lambda) { return {Poisson{lambda}}; }
  static CountDistribution negbinomial(double r, double p) { return {NegBinomial{r, p}}; }
  static CountDistribution geometric(double p) { return {Geometric{p}}; }
  static CountDistribution hypergeometric(std::int64_t n, std::int64_t m, std::int64_t k) {
    return {Hypergeometric{n, m, k}};
  }
  static CountDistribution mixture(std::vector<double> weights, std::vector<CountDistribution> comps) {
    return {Mixture{std::move(weights), std::move(comps)}};
  }

  const Variant& variant() const { return v_; }
  double truncation_tolerance() const { return tol_; }

 private:
  void validate() const;

  Variant v_;
  double tol_ = kDefaultTruncation;
};

namespace detail {

inline double log_choose(double n, double k) {
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace detail

inline void CountDistribution::validate() const {
  auto bad = [](const char* msg) { throw InvalidArgument(std::string("CountDistribution: ") + msg); };
  if (!(tol_ > 0 && tol_ < 1e-3)) bad("truncation tolerance must be in (0, 1e-3)");
  std::visit(detail::overloaded{
                 [&](const Deterministic& d) { if (d.k < 0) bad("deterministic count must be >= 0"); },
                 [&](const Binomial& d) {
                   if (d.n < 0) bad("binomial n must be >= 0");
                   if (!(d.p >= 0 && d.p <= 1)) bad("binomial p must be in [0,1]");
                 },
                 [&](const Poisson& d) { if (!(d.lambda >= 0 && std::isfinite(d.lambda))) bad("poisson mean must be >= 0"); },
                 [&](const NegBinomial& d) {
                   if (!(d.r > 0 && std::isfinite(d.r))) bad("negative binomial r must be > 0");
                   if (!(d.p >= 0 && d.p < 1)) bad("negative binomial p must be in [0,1)");
                 },
                 [&](const Geometric& d) { if (!(d.p > 0 && d.p <= 1)) bad("geometric p must be in (0,1]"); },
                 [&](const Hypergeometric& d) {
                   if (d.n < 0 || d.m < 0 || d.k < 0 || d.m > d.n || d.k > d.n)
                     bad("hypergeometric requires 0 <= m,k <= n");
                 },
                 [&](const Mixture& d) {
                   if (d.weights.empty() || d.weights.size() != d.components.size())
                     bad("mixture needs one weight per component");
                   double s = 0;
                   for (double w : d.weights) {
                     if (!(w >= 0)) bad("mixture weights must be non-negative");
                     s += w;
                   }
                   if (std::abs(s - 1) > 1e-12) bad("mixture weights must sum to 1");
                 },
             },
             v_);
}

/// Probability mass at i.
inline double pmf(const CountDistribution& dist, std::int64_t i) {
  if (i < 0) return 0;
  const double x = static_cast<double>(i);
  return std::visit(
      detail::overloaded{
          [&](const Deterministic& d) { return i == d.k ? 1.0 : 0.0; },
          [&](const Binomial& d) {
            if (i > d.n) return 0.0;
            if (d.p == 0) return i == 0 ? 1.0 : 0.0;
            if (d.p == 1) return i == d.n ? 1.0 : 0.0;
            const double n = static_cast<double>(d.n);
            return std::exp(detail::log_choose(n, x) + x * std::log(d.p) + (n - x) * std::log1p(-d.p));
          },
          [&](const Poisson& d) {
            if (d.lambda == 0) return i == 0 ? 1.0 : 0.0;
            return std::exp(x * std::log(d.lambda) - d.lambda - std::lgamma(x + 1));
          },
          [&](const NegBinomial& d) {
            if (d.p == 0) return i == 0 ? 1.0 : 0.0;
            return std::exp(std::lgamma(d.r + x) - std::lgamma(x + 1) - std::lgamma(d.r) + x * std::log(d.p) +
                            d.r * std::log1p(-d.p));
          },
          [&](const Geometric& d) {
            if (d.p == 1) return i == 0 ? 1.0 : 0.0;
            return d.p * std::exp(x * std::log1p(-d.p));
          },
          [&](const Hypergeometric& d) {
            const std::int64_t lo = std::max<std::int64_t>(0, d.k - d.n + d.m);
            const std::int64_t hi = std::min(d.m, d.k);
            if (i < lo || i > hi) return 0.0;
            const double n = static_cast<double>(d.n), m = static_cast<double>(d.m), k = static_cast<double>(d.k);
            return std::exp(detail::log_choose(m, x) + detail::log_choose(n - m, k - x) - detail::log_choose(n, k));
          },
          [&](const Mixture& d) {
            double s = 0;
            for (std::size_t j = 0; j < d.weights.size(); ++j) s += d.weights[j] * pmf(d.components[j], i);
            return s;
          },
      },
      dist.variant());
}

inline double mean(const CountDistribution& dist) {
  return std::visit(detail::overloaded{
                        [](const Deterministic& d) { return static_cast<double>(d.k); },
                        [](const Binomial& d) { return static_cast<double>(d.n) * d.p; },
                        [](const Poisson& d) { return d.lambda; },
                        [](const NegBinomial& d) { return d.r * d.p / (1 - d.p); },
                        [](const Geometric& d) { return 1 / d.p - 1; },
                        [](const Hypergeometric& d) {
                          return d.n == 0 ? 0.0 : static_cast<double>(d.k) * static_cast<double>(d.m) / static_cast<double>(d.n);
                        },
                        [](const Mixture& d) {
                          double s = 0;
                          for (std::size_t j = 0; j < d.weights.size(); ++j) s += d.weights[j] * mean(d.components[j]);
                          return s;
                        },
                    },
                    dist.variant());
}

inline double variance(const CountDistribution& dist) {
  return std::visit(detail::overloaded{
                        [](const Deterministic&) { return 0.0; },
                        [](const Binomial& d) { return static_cast<double>(d.n) * d.p * (1 - d.p); },
                        [](const Poisson& d) { return d.lambda; },
                        [](const NegBinomial& d) { return d.r * d.p / ((1 - d.p) * (1 - d.p)); },
                        [](const Geometric& d) { return (1 - d.p) / (d.p * d.p); },
                        [](const Hypergeometric& d) {
                          const double n = static_cast<double>(d.n), m = static_cast<double>(d.m), k = static_cast<double>(d.k);
                          if (n <= 1) return 0.0;
                          return k * (m / n) * (1 - m / n) * (n - k) / (n - 1);
                        },
                        [&](const Mixture& d) {
                          const double mu = mean(dist);
                          double s = 0;
                          for (std::size_t j = 0; j < d.weights.size(); ++j) {
                            const double mj = mean(d.components[j]);
                            s += d.weights[j] * (variance(d.components[j]) + (mj - mu) * (mj - mu));
                          }
                          return s;
                        },
                    },
                    dist.variant());
}

/// Largest integer whose mass is kept: exact support maximum for finite laws,
/// otherwise the point beyond which the tail mass is below the truncation
/// tolerance.
inline std::int64_t support_max(const CountDistribution& dist) {
  const double tol = dist.truncation_tolerance();
  auto tail_walk = [&](std::int64_t start) {
    // Ratios pmf(i+1)/pmf(i) are non-increasing for Poisson, negative
    // binomial and geometric laws, so a geometric series bounds the tail.
    std::int64_t i = start;
    while (true) {
      const double p1 = pmf(dist, i + 1);
      const double p2 = pmf(dist, i + 2);
      if (p1 == 0) return i;
      const double q = p2 / p1;
      if (q < 1 && p1 / (1 - q) < tol) return i;
      ++i;
      if (i > (std::int64_t{1} << 40)) throw Error("support_max: tail does not decay");
    }
  };
  return std::visit(
      detail::overloaded{
          [](const Deterministic& d) { return d.k; },
          [](const Binomial& d) { return d.p == 0 ? std::int64_t{0} : d.n; },
          [&](const Poisson& d) { return tail_walk(static_cast<std::int64_t>(std::floor(d.lambda))); },
          [&](const NegBinomial&) { return tail_walk(static_cast<std::int64_t>(std::floor(mean(dist)))); },
          [&](const Geometric&) { return tail_walk(0); },
          [](const Hypergeometric& d) { return std::min(d.m, d.k); },
          [](const Mixture& d) {
            std::int64_t m = 0;
            for (std::size_t j = 0; j < d.components.size(); ++j)
              if (d.weights[j] > 0) m = std::max(m, support_max(d.components[j]));
            return m;
          },
      },
      dist.variant());
}

/// Draws one value with the exact law.
inline std::int64_t sample(const CountDistribution& dist, Engine& eng) {
  return std::visit(
      detail::overloaded{
          [](const Deterministic& d) { return d.k; },
          [&](const Binomial& d) -> std::int64_t {
            if (d.p == 0 || d.n == 0) return 0;
            if (d.p == 1) return d.n;
            return std::binomial_distribution<std::int64_t>(d.n, d.p)(eng);
          },
          [&](const Poisson& d) -> std::int64_t {
            if (d.lambda == 0) return 0;
            return std::poisson_distribution<std::int64_t>(d.lambda)(eng);
          },
          [&](const NegBinomial& d) -> std::int64_t {
            if (d.p == 0) return 0;
            // Gamma-Poisson mixture; valid for non-integer r.
            const double rate = std::gamma_distribution<double>(d.r, d.p / (1 - d.p))(eng);
            if (rate <= 0) return 0;
            return std::poisson_distribution<std::int64_t>(rate)(eng);
          },
          [&](const Geometric& d) -> std::int64_t {
            if (d.p == 1) return 0;
            return std::geometric_distribution<std::int64_t>(d.p)(eng);
          },
          [&](const Hypergeometric& d) -> std::int64_t {
            const double u = uniform01(eng);
            const std::int64_t lo = std::max<std::int64_t>(0, d.k - d.n + d.m);
            const std::int64_t hi = std::min(d.m, d.k);
            double c = 0;
            for (std::int64_t i = lo; i < hi; ++i) {
              c += pmf(dist, i);
              if (u < c) return i;
            }
            return hi;
          },
          [&](const Mixture& d) -> std::int64_t {
            std::discrete_distribution<std::size_t> pick(d.weights.begin(), d.weights.end());
            return sample(d.components[pick(eng)], eng);
          },
      },
      dist.variant());
}

inline std::int64_t sample(const CountDistribution& dist, const RandomStream& stream) {
  Engine eng = stream.engine();
  return sample(dist, eng);
}

/// Stop-loss transform a -> E (X - a)_+.
inline double stop_loss(const CountDistribution& dist, double a) {
  if (a < 0) throw InvalidArgument("stop_loss: a must be >= 0");
  const double mu = mean(dist);
  if (a <= mu) {
    // E(X-a)_+ = (mu - a) + E(a-X)_+ ; the second sum is finite.
    double s = 0;
    const auto top = static_cast<std::int64_t>(std::floor(a));
    for (std::int64_t i = 0; i <= top; ++i) s += (a - static_cast<double>(i)) * pmf(dist, i);
    return mu - a + s;
  }
  double s = 0;
  const std::int64_t hi = support_max(dist);
  for (auto i = static_cast<std::int64_t>(std::floor(a)) + 1; i <= hi; ++i)
    s += (static_cast<double>(i) - a) * pmf(dist, i);
  return s;
}

enum class CxOutcome { holds, fails, means_differ };

struct CxVerdict {
  CxOutcome outcome = CxOutcome::holds;
  double witness = 0;    ///< smallest violating a when outcome == fails
  double min_slack = 0;  ///< min over the grid of stop_loss(d2,a) - stop_loss(d1,a)
};

inline constexpr double kCxMeanTolerance = 1e-9;
inline constexpr double kCxSlack = 1e-12;

/// Convex order d1 <=cx d2 via stop-loss comparison on the half-integer grid.
/// Stop-loss functions of integer laws are piecewise linear with integer
/// knots, so the grid check is exact.
inline CxVerdict check_cx(const CountDistribution& d1, const CountDistribution& d2) {
  CxVerdict v;
  if (std::abs(mean(d1) - mean(d2)) > kCxMeanTolerance) {
    v.outcome = CxOutcome::means_differ;
    return v;
  }
  const std::int64_t top = std::max(support_max(d1), support_max(d2));
  v.min_slack = std::numeric_limits<double>::infinity();
  bool failed = false;
  for (std::int64_t twice = 0; twice <= 2 * top; ++twice) {
    const double a = 0.5 * static_cast<double>(twice);
    const double slack = stop_loss(d2, a) - stop_loss(d1, a);
    v.min_slack = std::min(v.min_slack, slack);
    if (!failed && slack < -kCxSlack) {
      failed = true;
      v.witness = a;
    }
  }
  v.outcome = failed ? CxOutcome::fails : CxOutcome::holds;
  return v;
}

inline std::string to_string(CxOutcome o) {
  switch (o) {
    case CxOutcome::holds: return "holds";
    case CxOutcome::fails: return "fails";
    case CxOutcome::means_differ: return "means_differ";
  }
  return "?";
}

/// Text form, e.g. "binomial(4,0.25)" or "mixture(0.5:geometric(1),0.5:geometric(0.25))".
inline std::string describe(const CountDistribution& dist) {
  return std::visit(
      detail::overloaded{
          [](const Deterministic& d) { return "deterministic(" + std::to_string(d.k) + ")"; },
          [](const Binomial& d) { return "binomial(" + std::to_string(d.n) + "," + format_real(d.p) + ")"; },
          [](const Poisson& d) { return "poisson(" + format_real(d.lambda) + ")"; },
          [](const NegBinomial& d) { return "negbinomial(" + format_real(d.r) + "," + format_real(d.p) + ")"; },
          [](const Geometric& d) { return "geometric(" + format_real(d.p) + ")"; },
          [](const Hypergeometric& d) {
            return "hypergeometric(" + std::to_string(d.n) + "," + std::to_string(d.m) + "," + std::to_string(d.k) + ")";
          },
          [](const Mixture& d) {
            std::string s = "mixture(";
            for (std::size_t j = 0; j < d.weights.size(); ++j) {
              if (j) s += ",";
              s += format_real(d.weights[j]) + ":" + describe(d.components[j]);
            }
            return s + ")";
          },
      },
      dist.variant());
}

namespace detail {

/// Splits on commas at parenthesis depth zero.
inline std::vector<std::string_view> split_top_level(std::string_view s) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    else if (s[i] == ')') --depth;
    else if (s[i] == ',' && depth == 0) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(s.substr(start));
  return parts;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Inverse of describe().
inline CountDistribution parse_count_distribution(std::string_view text) {
  text = detail::trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')')
    throw InvalidArgument("count distribution: expected name(args), got '" + std::string(text) + "'");
  const std::string name(detail::trim(text.substr(0, open)));
  const auto args = detail::split_top_level(text.substr(open + 1, text.size() - open - 2));
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw InvalidArgument("count distribution '" + name + "' takes " + std::to_string(n) + " arguments");
  };
  if (name == "deterministic") { need(1); return CountDistribution::deterministic(parse_integer(args[0])); }
  if (name == "binomial") { need(2); return CountDistribution::binomial(parse_integer(args[0]), parse_real(args[1])); }
  if (name == "poisson") { need(1); return CountDistribution::poisson(parse_real(args[0])); }
  if (name == "negbinomial") { need(2); return CountDistribution::negbinomial(parse_real(args[0]), parse_real(args[1])); }
  if (name == "geometric") { need(1); return CountDistribution::geometric(parse_real(args[0])); }
  if (name == "hypergeometric") {
    need(3);
    return CountDistribution::hypergeometric(parse_integer(args[0]), parse_integer(args[1]), parse_integer(args[2]));
  }
  if (name == "mixture") {
    std::vector<double> w;
    std::vector<CountDistribution> c;
    for (auto part : args) {
      const auto colon = part.find(':');
      if (colon == std::string_view::npos) throw InvalidArgument("mixture component must be weight:distribution");
      w.push_back(parse_real(part.substr(0, colon)));
      c.push_back(parse_count_distribution(part.substr(colon + 1)));
    }
    return CountDistribution::mixture(std::move(w), std::move(c));
  }
  throw InvalidArgument("unknown count distribution '" + name + "'");
}

/// Replication laws below Pois(lambda) in convex order, smallest first:
/// HGeo(n, m, lambda n / m), then Binom(t, lambda / t) for the trial counts
/// t in {m} and r_list (ascending), then Pois(lambda). The hypergeometric
/// link is included only when lambda n / m is an integer and lambda <= m <= n.
inline std::vector<CountDistribution> sub_poisson_chain(double lambda, std::int64_t n, std::int64_t m,
                                                        std::span<const std::int64_t> r_list) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw InvalidArgument("sub_poisson_chain: lambda must be positive");
  std::vector<std::int64_t> trials(r_list.begin(), r_list.end());
  trials.push_back(m);
  std::sort(trials.begin(), trials.end());
  trials.erase(std::unique(trials.begin(), trials.end()), trials.end());
  for (auto t : trials)
    if (static_cast<double>(t) < lambda) throw InvalidArgument("sub_poisson_chain: trial counts must be >= lambda");
  std::vector<CountDistribution> chain;
  const double k = lambda * static_cast<double>(n) / static_cast<double>(m);
  if (m <= n && lambda <= static_cast<double>(m) && k == std::floor(k))
    chain.push_back(CountDistribution::hypergeometric(n, m, static_cast<std::int64_t>(k)));
  for (auto t : trials) chain.push_back(CountDistribution::binomial(t, lambda / static_cast<double>(t)));
  chain.push_back(CountDistribution::poisson(lambda));
  return chain;
}

/// Replication laws above Pois(lambda) in convex order, smallest first:
/// Pois(lambda), NBinom(r2, lambda/(r2+lambda)), NBinom(r1, lambda/(r1+lambda)),
/// Geo(1/(1+lambda)) and the mixture sum_j w_j Geo(p_j), which needs
/// sum_j w_j / p_j = lambda + 1 for equal means.
inline std::vector<CountDistribution> super_poisson_chain(double lambda, double r1, double r2,
                                                          std::span<const double> weights, std::span<const double> ps) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw InvalidArgument("super_poisson_chain: lambda must be positive");
  if (!(r1 > 0) || !(r2 >= r1)) throw InvalidArgument("super_poisson_chain: need 0 < r1 <= r2");
  if (weights.size() != ps.size() || weights.empty())
    throw InvalidArgument("super_poisson_chain: one weight per geometric component");
  double mean_sum = 0;
  std::vector<CountDistribution> comps;
  for (std::size_t j = 0; j < ps.size(); ++j) {
    comps.push_back(CountDistribution::geometric(ps[j]));
    mean_sum += weights[j] / ps[j];
  }
  if (std::abs(mean_sum - (lambda + 1)) > kCxMeanTolerance)
    throw InvalidArgument("super_poisson_chain: mixture must satisfy sum w_j / p_j = lambda + 1");
  return {CountDistribution::poisson(lambda), CountDistribution::negbinomial(r2, lambda / (r2 + lambda)),
          CountDistribution::negbinomial(r1, lambda / (r1 + lambda)), CountDistribution::geometric(1 / (1 + lambda)),
          CountDistribution::mixture({weights.begin(), weights.end()}, std::move(comps))};
}

}  // namespace ppclust

#endif  // PPCLUST_DISTS_HPP
