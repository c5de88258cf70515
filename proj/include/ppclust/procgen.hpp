#ifndef PPCLUST_PROCGEN_HPP
#define PPCLUST_PROCGEN_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "core.hpp"
#include "dists.hpp"
#include "random.hpp"

namespace ppclust {

enum class LatticeKind { square, hex };

/// Displacement of replicas around their parent site.
struct Displacement {
  enum class Kind { uniform_in_cell, gaussian, uniform_in_ball };
  Kind kind = Kind::uniform_in_cell;
  double scale = 0;  ///< sigma for gaussian, radius for uniform_in_ball

  static Displacement in_cell() { return {}; }
  static Displacement gaussian(double sigma) { return {Kind::gaussian, sigma}; }
  static Displacement in_ball(double radius) { return {Kind::uniform_in_ball, radius}; }
};

struct HomogeneousPoisson { double intensity = 1; };
struct SquareLattice { double spacing = 1; bool stationary = true; };
struct HexLattice { double spacing = 1; bool stationary = true; };
struct BernoulliLattice {
  double spacing = 1;
  double p = 1;
  bool stationary = true;
  LatticeKind lattice = LatticeKind::square;
};
struct BinomialProcess { std::int64_t n = 0; };
/// Clustering perturbation of a (stationary) lattice: each site is replaced by
/// an independent number of replicas, each displaced independently.
struct PerturbedLattice {
  double spacing = 1;
  CountDistribution replication = CountDistribution::deterministic(1);
  Displacement displacement;
  LatticeKind lattice = LatticeKind::square;
};
struct MaternCluster { double parent_intensity = 1, mean_cluster_size = 1, cluster_radius = 0.1; };
struct ThomasCluster { double parent_intensity = 1, mean_cluster_size = 1, sigma = 0.1; };
/// Clustering perturbation of a Poisson parent process. uniform_in_cell is
/// not meaningful here and is rejected.
struct NeymanScott {
  double parent_intensity = 1;
  CountDistribution replication = CountDistribution::poisson(1);
  Displacement displacement = Displacement::gaussian(0.1);
};
/// Poisson process with a random intensity: either a discrete set of
/// (weight, intensity) pairs, or scale * N with N drawn from `mixing`.
struct MixedPoisson {
  std::vector<double> weights;
  std::vector<double> intensities;
  std::optional<CountDistribution> mixing;
  double scale = 1;
};
/// Cox process driven by exp of a Gaussian field with covariance
/// variance * exp(-|x - y| / correlation_length), piecewise constant on a grid.
struct LogGaussianCox {
  double field_mean = 0;
  double field_variance = 1;
  double correlation_length = 1;
  std::size_t grid_n = 16;
};
/// Ginibre process restricted to the disk of the given radius and truncated
/// to the leading `rank` eigenfunctions; the disk is centred in the window.
struct GinibreTruncated { std::size_t rank = 40; double radius = 3; };

using GeneratorSpec = std::variant<HomogeneousPoisson, SquareLattice, HexLattice, BernoulliLattice, BinomialProcess,
                                   PerturbedLattice, MaternCluster, ThomasCluster, NeymanScott, MixedPoisson,
                                   LogGaussianCox, GinibreTruncated>;

inline constexpr std::size_t kMaxGinibreRank = 400;
inline constexpr std::size_t kMaxLgcpCells = 4096;

struct IntensityReport {
  double value = 0;
  bool exact = true;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument("GeneratorSpec: " + msg);
}

inline void validate_displacement(const Displacement& d) {
  if (d.kind != Displacement::Kind::uniform_in_cell) require(d.scale > 0 && std::isfinite(d.scale), "displacement scale must be > 0");
}

}  // namespace detail

inline void validate(const GeneratorSpec& spec) {
  using detail::require;
  std::visit(detail::overloaded{
                 [](const HomogeneousPoisson& s) { require(s.intensity >= 0 && std::isfinite(s.intensity), "intensity must be >= 0"); },
                 [](const SquareLattice& s) { require(s.spacing > 0, "spacing must be > 0"); },
                 [](const HexLattice& s) { require(s.spacing > 0, "spacing must be > 0"); },
                 [](const BernoulliLattice& s) {
                   require(s.spacing > 0, "spacing must be > 0");
                   require(s.p >= 0 && s.p <= 1, "retention probability must be in [0,1]");
                 },
                 [](const BinomialProcess& s) { require(s.n >= 0, "point count must be >= 0"); },
                 [](const PerturbedLattice& s) {
                   require(s.spacing > 0, "spacing must be > 0");
                   detail::validate_displacement(s.displacement);
                 },
                 [](const MaternCluster& s) {
                   require(s.parent_intensity > 0, "parent intensity must be > 0");
                   require(s.mean_cluster_size > 0, "mean cluster size must be > 0");
                   require(s.cluster_radius > 0, "cluster radius must be > 0");
                 },
                 [](const ThomasCluster& s) {
                   require(s.parent_intensity > 0, "parent intensity must be > 0");
                   require(s.mean_cluster_size > 0, "mean cluster size must be > 0");
                   require(s.sigma > 0, "sigma must be > 0");
                 },
                 [](const NeymanScott& s) {
                   require(s.parent_intensity > 0, "parent intensity must be > 0");
                   require(s.displacement.kind != Displacement::Kind::uniform_in_cell,
                           "Neyman-Scott needs gaussian or uniform_in_ball displacement");
                   detail::validate_displacement(s.displacement);
                 },
                 [](const MixedPoisson& s) {
                   if (s.mixing) {
                     require(s.weights.empty() && s.intensities.empty(), "give either a mixing law or weight/intensity pairs");
                     require(s.scale > 0, "mixing scale must be > 0");
                     return;
                   }
                   require(!s.weights.empty() && s.weights.size() == s.intensities.size(),
                           "mixed Poisson needs matching weights and intensities");
                   double sum = 0;
                   for (std::size_t i = 0; i < s.weights.size(); ++i) {
                     require(s.weights[i] >= 0 && s.intensities[i] >= 0, "weights and intensities must be >= 0");
                     sum += s.weights[i];
                   }
                   require(std::abs(sum - 1) <= 1e-12, "mixture weights must sum to 1");
                 },
                 [](const LogGaussianCox& s) {
                   require(s.field_variance >= 0, "field variance must be >= 0");
                   require(s.correlation_length > 0, "correlation length must be > 0");
                   require(s.grid_n >= 1 && s.grid_n <= 64, "grid_n must be in [1, 64]");
                 },
                 [](const GinibreTruncated& s) {
                   require(s.rank >= 1, "rank must be >= 1");
                   require(s.rank <= kMaxGinibreRank, "rank exceeds the configured cap");
                   require(s.radius > 0, "radius must be > 0");
                   require(s.radius * s.radius <= static_cast<double>(s.rank), "radius^2 must not exceed the rank");
                 },
             },
             spec);
}

/// Exact intensity (points per unit volume) of the stationary family.
/// For the truncated Ginibre process this is the untruncated value 1/pi,
/// which the truncated process attains at the disk centre.
inline IntensityReport intensity(const GeneratorSpec& spec, std::size_t dim = 2) {
  validate(spec);
  const double d = static_cast<double>(dim);
  const double v = std::visit(
      detail::overloaded{
          [](const HomogeneousPoisson& s) { return s.intensity; },
          [&](const SquareLattice& s) { return 1 / std::pow(s.spacing, d); },
          [](const HexLattice& s) { return 2 / (std::sqrt(3.0) * s.spacing * s.spacing); },
          [&](const BernoulliLattice& s) {
            const double base = s.lattice == LatticeKind::hex ? 2 / (std::sqrt(3.0) * s.spacing * s.spacing)
                                                              : 1 / std::pow(s.spacing, d);
            return s.p * base;
          },
          [](const BinomialProcess&) -> double { throw InvalidArgument("intensity: binomial process depends on the window"); },
          [&](const PerturbedLattice& s) {
            const double base = s.lattice == LatticeKind::hex ? 2 / (std::sqrt(3.0) * s.spacing * s.spacing)
                                                              : 1 / std::pow(s.spacing, d);
            return mean(s.replication) * base;
          },
          [](const MaternCluster& s) { return s.parent_intensity * s.mean_cluster_size; },
          [](const ThomasCluster& s) { return s.parent_intensity * s.mean_cluster_size; },
          [](const NeymanScott& s) { return s.parent_intensity * mean(s.replication); },
          [](const MixedPoisson& s) {
            if (s.mixing) return s.scale * mean(*s.mixing);
            double m = 0;
            for (std::size_t i = 0; i < s.weights.size(); ++i) m += s.weights[i] * s.intensities[i];
            return m;
          },
          [](const LogGaussianCox& s) { return std::exp(s.field_mean + s.field_variance / 2); },
          [](const GinibreTruncated&) { return 1 / std::numbers::pi; },
      },
      spec);
  return {v, true};
}

/// Expected number of points in the window.
inline double expected_count(const GeneratorSpec& spec, const Window& w) {
  if (auto* b = std::get_if<BinomialProcess>(&spec)) return static_cast<double>(b->n);
  if (auto* g = std::get_if<GinibreTruncated>(&spec)) {
    double s = 0;
    for (std::size_t k = 0; k < g->rank; ++k) s += boost::math::gamma_p(static_cast<double>(k + 1), g->radius * g->radius);
    return s;
  }
  return intensity(spec, w.dim()).value * volume(w);
}

namespace detail {

struct LatticeGeometry {
  std::size_t dim;
  LatticeKind kind;
  double spacing;
};

/// Random offset uniform in the fundamental cell (stationary lattice).
inline Point lattice_shift(const LatticeGeometry& g, Engine& eng) {
  Point s(g.dim);
  if (g.kind == LatticeKind::hex) {
    const double u = uniform01(eng), v = uniform01(eng);
    s[0] = g.spacing * (u + v / 2);
    s[1] = g.spacing * v * std::sqrt(3.0) / 2;
  } else {
    for (std::size_t i = 0; i < g.dim; ++i) s[i] = g.spacing * uniform01(eng);
  }
  return s;
}

/// Sites of shift + lattice inside [lower - halo, upper + halo), row order.
inline std::vector<Point> lattice_sites(const LatticeGeometry& g, const Window& w, const Point& shift, double halo) {
  std::vector<Point> sites;
  if (g.kind == LatticeKind::hex) {
    if (w.dim() != 2) throw InvalidArgument("hexagonal lattice requires d = 2");
    const double h = g.spacing * std::sqrt(3.0) / 2;
    const double ylo = w.lower()[1] - halo, yhi = w.upper()[1] + halo;
    const double xlo = w.lower()[0] - halo, xhi = w.upper()[0] + halo;
    const auto j0 = static_cast<long>(std::ceil((ylo - shift[1]) / h));
    for (long j = j0;; ++j) {
      const double y = shift[1] + static_cast<double>(j) * h;
      if (y >= yhi) break;
      const double x0 = shift[0] + static_cast<double>(j) * g.spacing / 2;
      const auto i0 = static_cast<long>(std::ceil((xlo - x0) / g.spacing));
      for (long i = i0;; ++i) {
        const double x = x0 + static_cast<double>(i) * g.spacing;
        if (x >= xhi) break;
        if (x >= xlo && y >= ylo) sites.push_back(Point{x, y});
      }
    }
    return sites;
  }
  const std::size_t d = w.dim();
  std::array<long, kMaxDim> lo{}, hi{}, idx{};
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = static_cast<long>(std::ceil((w.lower()[i] - halo - shift[i]) / g.spacing));
    hi[i] = static_cast<long>(std::ceil((w.upper()[i] + halo - shift[i]) / g.spacing));  // exclusive
    if (hi[i] <= lo[i]) return sites;
    idx[i] = lo[i];
  }
  while (true) {
    Point p(d);
    bool inside = true;
    for (std::size_t i = 0; i < d; ++i) {
      p[i] = shift[i] + static_cast<double>(idx[i]) * g.spacing;
      inside = inside && p[i] >= w.lower()[i] - halo && p[i] < w.upper()[i] + halo;
    }
    if (inside) sites.push_back(p);
    std::size_t i = 0;
    for (; i < d; ++i) {
      if (++idx[i] < hi[i]) break;
      idx[i] = lo[i];
    }
    if (i == d) break;
  }
  return sites;
}

/// Uniform point in the Voronoi cell of the origin (cube or hexagon).
inline Point uniform_in_voronoi_cell(const LatticeGeometry& g, Engine& eng) {
  Point p(g.dim);
  if (g.kind == LatticeKind::square) {
    for (std::size_t i = 0; i < g.dim; ++i) p[i] = g.spacing * (uniform01(eng) - 0.5);
    return p;
  }
  // Hexagon with vertices at distance spacing/sqrt(3); rejection from its box.
  const double D = g.spacing;
  const double half_h = D / std::sqrt(3.0);
  const double nbr[6][2] = {{D, 0}, {-D, 0}, {D / 2, D * std::sqrt(3.0) / 2}, {-D / 2, D * std::sqrt(3.0) / 2},
                            {D / 2, -D * std::sqrt(3.0) / 2}, {-D / 2, -D * std::sqrt(3.0) / 2}};
  while (true) {
    const double x = D * (uniform01(eng) - 0.5);
    const double y = half_h * (2 * uniform01(eng) - 1);
    bool ok = true;
    for (const auto& n : nbr) {
      // closer to origin than to neighbour n  <=>  x.n < |n|^2/2
      if (x * n[0] + y * n[1] >= D * D / 2) {
        ok = false;
        break;
      }
    }
    if (ok) return Point{x, y};
  }
}

inline Point displace(const Point& site, const Displacement& disp, const LatticeGeometry* cell, Engine& eng) {
  Point off(site.dim());
  switch (disp.kind) {
    case Displacement::Kind::uniform_in_cell:
      off = uniform_in_voronoi_cell(*cell, eng);
      break;
    case Displacement::Kind::gaussian: {
      std::normal_distribution<double> n(0.0, disp.scale);
      for (std::size_t i = 0; i < site.dim(); ++i) off[i] = n(eng);
      break;
    }
    case Displacement::Kind::uniform_in_ball:
      off = uniform_in_ball(site.dim(), disp.scale, eng);
      break;
  }
  Point p = site;
  for (std::size_t i = 0; i < site.dim(); ++i) p[i] += off[i];
  return p;
}

inline double displacement_halo(const Displacement& disp, double spacing) {
  switch (disp.kind) {
    case Displacement::Kind::uniform_in_cell: return spacing;
    case Displacement::Kind::gaussian: return 6 * disp.scale;
    case Displacement::Kind::uniform_in_ball: return disp.scale;
  }
  return 0;
}

/// Keeps p (wrapped on the torus, dropped outside a Euclidean window).
inline void emit(std::vector<Point>& out, const Window& w, const Point& p) {
  if (w.metric() == Metric::periodic) {
    out.push_back(w.wrap(p));
  } else if (w.contains(p)) {
    out.push_back(p);
  }
}

inline Window dilate(const Window& w, double halo) {
  Point lo = w.lower(), hi = w.upper();
  for (std::size_t i = 0; i < w.dim(); ++i) {
    lo[i] -= halo;
    hi[i] += halo;
  }
  return Window(lo, hi, w.metric());
}

inline void poisson_points(std::vector<Point>& out, const Window& w, double rate, Engine& eng) {
  const double m = rate * volume(w);
  if (m <= 0) return;
  const auto n = std::poisson_distribution<std::int64_t>(m)(eng);
  for (std::int64_t i = 0; i < n; ++i) out.push_back(uniform_in(w, eng));
}

/// Clustering perturbation of a Poisson parent process.
inline std::vector<Point> cluster_process(const Window& w, double parent_rate, const CountDistribution& replication,
                                          const Displacement& disp, Engine& eng) {
  const double halo = w.metric() == Metric::periodic ? 0.0 : displacement_halo(disp, 0);
  const Window parent_window = halo > 0 ? dilate(w, halo) : w;
  std::vector<Point> parents;
  poisson_points(parents, parent_window, parent_rate, eng);
  std::vector<Point> out;
  for (const auto& x : parents) {
    const std::int64_t n = sample(replication, eng);
    for (std::int64_t j = 0; j < n; ++j) emit(out, w, displace(x, disp, nullptr, eng));
  }
  return out;
}

struct CholeskyKey {
  std::size_t grid_n;
  double variance, corr_len;
  std::vector<double> sides;
  auto tie() const { return std::tie(grid_n, variance, corr_len, sides); }
  bool operator<(const CholeskyKey& o) const { return tie() < o.tie(); }
};

/// Lower Cholesky factor of the grid covariance, cached per (grid, kernel).
inline std::shared_ptr<const Eigen::MatrixXd> lgcp_factor(const LogGaussianCox& s, const Window& w,
                                                          const std::vector<Point>& centers) {
  static std::mutex mu;
  static std::map<CholeskyKey, std::shared_ptr<const Eigen::MatrixXd>> cache;
  CholeskyKey key{s.grid_n, s.field_variance, s.correlation_length, {}};
  for (std::size_t i = 0; i < w.dim(); ++i) key.sides.push_back(w.side(i));
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const auto n = static_cast<Eigen::Index>(centers.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double r = euclidean_distance(centers[static_cast<std::size_t>(i)], centers[static_cast<std::size_t>(j)]);
      cov(i, j) = cov(j, i) = s.field_variance * std::exp(-r / s.correlation_length);
    }
  cov.diagonal().array() += 1e-10 * std::max(s.field_variance, 1e-300);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw Error("log-Gaussian Cox: covariance is not positive definite");
  auto factor = std::make_shared<const Eigen::MatrixXd>(llt.matrixL());
  std::lock_guard lock(mu);
  cache.emplace(std::move(key), factor);
  return factor;
}

inline std::vector<Point> sample_lgcp(const LogGaussianCox& s, const Window& w, Engine& eng) {
  std::size_t cells = 1;
  for (std::size_t i = 0; i < w.dim(); ++i) cells *= s.grid_n;
  if (cells > kMaxLgcpCells) throw InvalidArgument("log-Gaussian Cox: grid exceeds 4096 cells");
  const auto centers = grid_centers(w, s.grid_n);
  const auto factor = lgcp_factor(s, w, centers);
  Eigen::VectorXd z(static_cast<Eigen::Index>(cells));
  std::normal_distribution<double> n01;
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = n01(eng);
  const Eigen::VectorXd field = (*factor) * z;
  double cell_vol = 1;
  for (std::size_t i = 0; i < w.dim(); ++i) cell_vol *= w.side(i) / static_cast<double>(s.grid_n);
  std::vector<Point> out;
  for (std::size_t c = 0; c < cells; ++c) {
    const double rate = std::exp(s.field_mean + field[static_cast<Eigen::Index>(c)]) * cell_vol;
    const auto k = rate > 0 ? std::poisson_distribution<std::int64_t>(rate)(eng) : 0;
    for (std::int64_t j = 0; j < k; ++j) {
      Point p = centers[c];
      for (std::size_t i = 0; i < w.dim(); ++i) {
        const double h = w.side(i) / static_cast<double>(s.grid_n);
        p[i] += h * (uniform01(eng) - 0.5);
      }
      if (w.contains(p)) out.push_back(p);
      else out.push_back(w.wrap(p));
    }
  }
  return out;
}

/// Ginibre restricted to a centred disk. Eigenfunctions
/// phi_k(z) = z^k e^{-|z|^2/2} / sqrt(pi k! P(k+1, R^2)), eigenvalues
/// P(k+1, R^2) (regularized lower incomplete gamma). Each eigenfunction is
/// kept by an independent Bernoulli draw; the resulting projection process is
/// sampled sequentially by rejection from the uniform law on the disk.
inline std::vector<Point> sample_ginibre(const GinibreTruncated& s, const Window& w, Engine& eng) {
  if (w.dim() != 2) throw InvalidArgument("Ginibre process requires d = 2");
  const double R = s.radius, R2 = R * R;
  Point centre(2);
  for (std::size_t i = 0; i < 2; ++i) {
    centre[i] = (w.lower()[i] + w.upper()[i]) / 2;
    if (w.side(i) / 2 < R) throw InvalidArgument("Ginibre disk does not fit in the window");
  }
  std::vector<std::size_t> kept;
  std::vector<double> log_norm;  // log of 1/sqrt(pi k! lambda_k)
  for (std::size_t k = 0; k < s.rank; ++k) {
    const double lam = boost::math::gamma_p(static_cast<double>(k + 1), R2);
    if (lam > 0 && uniform01(eng) < lam) {
      kept.push_back(k);
      log_norm.push_back(-0.5 * (std::log(std::numbers::pi) + std::lgamma(static_cast<double>(k) + 1) + std::log(lam)));
    }
  }
  const std::size_t n = kept.size();
  if (n == 0) return {};
  using cplx = std::complex<double>;
  auto features = [&](double x, double y) {
    std::vector<cplx> v(n);
    const double r2 = x * x + y * y;
    const double r = std::sqrt(r2);
    const double theta = std::atan2(y, x);
    for (std::size_t j = 0; j < n; ++j) {
      const double k = static_cast<double>(kept[j]);
      const double logmag = (r > 0 ? k * std::log(r) : (kept[j] == 0 ? 0.0 : -INFINITY)) - r2 / 2 + log_norm[j];
      v[j] = std::polar(std::exp(logmag), k * theta);
    }
    return v;
  };
  // Bound on sum_j |phi_j|^2 over the disk; radial, evaluated on a fine grid.
  double bound = 0;
  for (int i = 0; i <= 4000; ++i) {
    const double r = R * i / 4000.0;
    double s2 = 0;
    for (const auto& c : features(r, 0)) s2 += std::norm(c);
    bound = std::max(bound, s2);
  }
  bound *= 1.05;

  std::vector<std::vector<cplx>> basis;
  std::vector<Point> out;
  for (std::size_t step = 0; step < n; ++step) {
    while (true) {
      const double rr = R * std::sqrt(uniform01(eng));
      const double th = 2 * std::numbers::pi * uniform01(eng);
      const double x = rr * std::cos(th), y = rr * std::sin(th);
      auto v = features(x, y);
      double residual = 0;
      for (const auto& c : v) residual += std::norm(c);
      for (const auto& e : basis) {
        cplx dot = 0;
        for (std::size_t j = 0; j < n; ++j) dot += std::conj(e[j]) * v[j];
        residual -= std::norm(dot);
      }
      if (uniform01(eng) * bound >= residual) continue;
      for (const auto& e : basis) {
        cplx dot = 0;
        for (std::size_t j = 0; j < n; ++j) dot += std::conj(e[j]) * v[j];
        for (std::size_t j = 0; j < n; ++j) v[j] -= dot * e[j];
      }
      double norm = 0;
      for (const auto& c : v) norm += std::norm(c);
      norm = std::sqrt(norm);
      for (auto& c : v) c /= norm;
      basis.push_back(std::move(v));
      out.push_back(Point{centre[0] + x, centre[1] + y});
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Draws one realisation restricted to the window. Output is sorted
/// lexicographically, so it is a pure function of (spec, window, stream).
inline PointPattern sample(const GeneratorSpec& spec, const Window& w, const RandomStream& stream) {
  validate(spec);
  Engine eng = stream.engine();
  PointPattern out{w, {}};
  auto& pts = out.points;
  const std::size_t d = w.dim();
  const bool periodic = w.metric() == Metric::periodic;

  auto lattice = [&](const detail::LatticeGeometry& g, bool stationary) {
    const Point shift = stationary ? detail::lattice_shift(g, eng) : Point(d);
    return detail::lattice_sites(g, w, shift, 0.0);
  };

  std::visit(
      detail::overloaded{
          [&](const HomogeneousPoisson& s) { detail::poisson_points(pts, w, s.intensity, eng); },
          [&](const SquareLattice& s) { pts = lattice({d, LatticeKind::square, s.spacing}, s.stationary); },
          [&](const HexLattice& s) { pts = lattice({d, LatticeKind::hex, s.spacing}, s.stationary); },
          [&](const BernoulliLattice& s) {
            for (const auto& x : lattice({d, s.lattice, s.spacing}, s.stationary))
              if (uniform01(eng) < s.p) pts.push_back(x);
          },
          [&](const BinomialProcess& s) {
            for (std::int64_t i = 0; i < s.n; ++i) pts.push_back(uniform_in(w, eng));
          },
          [&](const PerturbedLattice& s) {
            const detail::LatticeGeometry g{d, s.lattice, s.spacing};
            const Point shift = detail::lattice_shift(g, eng);
            const double halo = periodic ? 0.0 : detail::displacement_halo(s.displacement, s.spacing);
            for (const auto& x : detail::lattice_sites(g, w, shift, halo)) {
              const std::int64_t n = sample(s.replication, eng);
              for (std::int64_t j = 0; j < n; ++j) detail::emit(pts, w, detail::displace(x, s.displacement, &g, eng));
            }
          },
          [&](const MaternCluster& s) {
            pts = detail::cluster_process(w, s.parent_intensity, CountDistribution::poisson(s.mean_cluster_size),
                                          Displacement::in_ball(s.cluster_radius), eng);
          },
          [&](const ThomasCluster& s) {
            pts = detail::cluster_process(w, s.parent_intensity, CountDistribution::poisson(s.mean_cluster_size),
                                          Displacement::gaussian(s.sigma), eng);
          },
          [&](const NeymanScott& s) { pts = detail::cluster_process(w, s.parent_intensity, s.replication, s.displacement, eng); },
          [&](const MixedPoisson& s) {
            double rate = 0;
            if (s.mixing) {
              rate = s.scale * static_cast<double>(sample(*s.mixing, eng));
            } else {
              std::discrete_distribution<std::size_t> pick(s.weights.begin(), s.weights.end());
              rate = s.intensities[pick(eng)];
            }
            detail::poisson_points(pts, w, rate, eng);
          },
          [&](const LogGaussianCox& s) { pts = detail::sample_lgcp(s, w, eng); },
          [&](const GinibreTruncated& s) { pts = detail::sample_ginibre(s, w, eng); },
      },
      spec);
  out.canonicalize();
  return out;
}

inline std::string family_name(const GeneratorSpec& spec) {
  static const char* names[] = {"poisson",    "square_lattice", "hex_lattice",  "bernoulli_lattice",
                                "binomial",   "perturbed_lattice", "matern",     "thomas",
                                "neyman_scott", "mixed_poisson", "log_gaussian_cox", "ginibre"};
  return names[spec.index()];
}

}  // namespace ppclust

#endif  // PPCLUST_PROCGEN_HPP
