#ifndef PPCLUST_CORE_HPP
#define PPCLUST_CORE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppclust {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or violated preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kMaxDim = 8;

/// A point of R^d, d <= kMaxDim, stored inline.
class Point {
 public:
  Point() = default;

  explicit Point(std::size_t dim) : dim_(dim) {
    if (dim == 0 || dim > kMaxDim) throw InvalidArgument("Point: dimension must be in [1, 8]");
  }

  Point(std::initializer_list<double> coords) : Point(coords.size()) {
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  explicit Point(std::span<const double> coords) : Point(coords.size()) {
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  std::size_t dim() const { return dim_; }
  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }

  std::span<const double> coords() const { return {c_.data(), dim_}; }

  bool finite() const {
    return std::all_of(c_.begin(), c_.begin() + dim_, [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Point& a, const Point& b) {
    return a.dim_ == b.dim_ && std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
  }

  /// Lexicographic order on coordinates; the canonical ordering of patterns.
  friend bool operator<(const Point& a, const Point& b) {
    return std::lexicographical_compare(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin(),
                                        b.c_.begin() + b.dim_);
  }

 private:
  std::array<double, kMaxDim> c_{};
  std::size_t dim_ = 0;
};

enum class Metric { euclidean, periodic };

/// Axis-aligned box [lower, upper) with a Euclidean or toroidal metric.
class Window {
 public:
  Window() = default;

  Window(Point lower, Point upper, Metric metric = Metric::periodic)
      : lower_(lower), upper_(upper), metric_(metric) {
    if (lower.dim() != upper.dim() || lower.dim() == 0)
      throw InvalidArgument("Window: lower/upper dimension mismatch");
    for (std::size_t i = 0; i < lower.dim(); ++i) {
      if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i]))
        throw InvalidArgument("Window: lower[i] < upper[i] required on every axis");
    }
  }

  /// [0, side)^d
  static Window cube(std::size_t dim, double side, Metric metric = Metric::periodic) {
    return centered_or_origin(dim, 0.0, side, metric);
  }

  /// [-side/2, side/2)^d
  static Window centered_cube(std::size_t dim, double side, Metric metric = Metric::euclidean) {
    return centered_or_origin(dim, -side / 2, side / 2, metric);
  }

  std::size_t dim() const { return lower_.dim(); }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }
  Metric metric() const { return metric_; }
  double side(std::size_t i) const { return upper_[i] - lower_[i]; }

  double min_side() const {
    double m = side(0);
    for (std::size_t i = 1; i < dim(); ++i) m = std::min(m, side(i));
    return m;
  }

  bool contains(const Point& p) const {
    if (p.dim() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i)
      if (!(p[i] >= lower_[i] && p[i] < upper_[i])) return false;
    return true;
  }

  Window with_metric(Metric m) const { return Window(lower_, upper_, m); }

  /// Maps a point back into [lower, upper) along every axis (torus wrap).
  Point wrap(Point p) const {
    for (std::size_t i = 0; i < dim(); ++i) {
      const double s = side(i);
      double v = std::fmod(p[i] - lower_[i], s);
      if (v < 0) v += s;
      if (v >= s) v = 0;  // fmod rounding at the seam
      p[i] = lower_[i] + v;
    }
    return p;
  }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  static Window centered_or_origin(std::size_t dim, double lo, double hi, Metric metric) {
    Point l(dim), u(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      l[i] = lo;
      u[i] = hi;
    }
    return Window(l, u, metric);
  }

  Point lower_;
  Point upper_;
  Metric metric_ = Metric::periodic;
};

/// A finite configuration of points inside a window.
struct PointPattern {
  Window window;
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Sorts points lexicographically.
  void canonicalize() { std::sort(points.begin(), points.end()); }

  void validate() const {
    for (const auto& p : points) {
      if (!p.finite()) throw InvalidArgument("PointPattern: non-finite coordinate");
      if (!window.contains(p)) throw InvalidArgument("PointPattern: point outside window");
    }
  }
};

/// Squared distance under the window metric; periodic uses the nearest image.
inline double distance_sq(const Point& a, const Point& b, const Window& w) {
  if (a.dim() != b.dim() || a.dim() != w.dim())
    throw InvalidArgument("distance: dimension mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    double delta = std::abs(a[i] - b[i]);
    if (w.metric() == Metric::periodic) {
      const double L = w.side(i);
      delta = std::fmod(delta, L);
      delta = std::min(delta, L - delta);
    }
    s += delta * delta;
  }
  return s;
}

inline double distance(const Point& a, const Point& b, const Window& w) {
  return std::sqrt(distance_sq(a, b, w));
}

/// Plain Euclidean distance, ignoring any window.
inline double euclidean_distance(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("distance: dimension mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Lebesgue measure of the window.
inline double volume(const Window& w) {
  double v = 1;
  for (std::size_t i = 0; i < w.dim(); ++i) v *= w.side(i);
  return v;
}

/// Volume of the unit ball in R^d: pi^{d/2} / Gamma(d/2 + 1).
inline double unit_ball_volume(int d) {
  if (d < 1) throw InvalidArgument("unit_ball_volume: d must be >= 1");
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

inline double ball_volume(int d, double radius) {
  return unit_ball_volume(d) * std::pow(radius, d);
}

inline constexpr std::size_t kDefaultMaxGridCells = std::size_t{1} << 24;

/// Centers of the n^d congruent cells tiling w, first axis fastest.
inline std::vector<Point> grid_centers(const Window& w, std::size_t n_per_axis,
                                       std::size_t max_cells = kDefaultMaxGridCells) {
  if (n_per_axis < 1) throw InvalidArgument("grid_centers: n_per_axis must be >= 1");
  const std::size_t d = w.dim();
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (total > max_cells / n_per_axis) throw InvalidArgument("grid_centers: too many cells");
    total *= n_per_axis;
  }
  std::vector<Point> out;
  out.reserve(total);
  std::array<std::size_t, kMaxDim> idx{};
  for (std::size_t c = 0; c < total; ++c) {
    Point p(d);
    for (std::size_t i = 0; i < d; ++i)
      p[i] = w.lower()[i] + (static_cast<double>(idx[i]) + 0.5) * w.side(i) / n_per_axis;
    out.push_back(p);
    for (std::size_t i = 0; i < d; ++i) {
      if (++idx[i] < n_per_axis) break;
      idx[i] = 0;
    }
  }
  return out;
}

}  // namespace ppclust

#endif  // PPCLUST_CORE_HPP
