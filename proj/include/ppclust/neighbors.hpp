#ifndef PPCLUST_NEIGHBORS_HPP
#define PPCLUST_NEIGHBORS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "core.hpp"

namespace ppclust {

/// Bucket grid over a pattern for fixed-radius queries under the window
/// metric. Cell sides are at least `radius`, so every point within `radius`
/// of a query lives in the query's cell or an adjacent one.
class CellIndex {
 public:
  CellIndex(const PointPattern& pattern, double radius) : pattern_(&pattern), radius_(radius) {
    const Window& w = pattern.window;
    dim_ = w.dim();
    const double cap_total = std::max(64.0, 2.0 * static_cast<double>(pattern.size()));
    const double per_axis_cap = std::max(1.0, std::floor(std::pow(cap_total, 1.0 / static_cast<double>(dim_))));
    total_ = 1;
    for (std::size_t i = 0; i < dim_; ++i) {
      double n = radius > 0 ? std::floor(w.side(i) / radius) : per_axis_cap;
      n = std::clamp(n, 1.0, per_axis_cap);
      cells_[i] = static_cast<std::size_t>(n);
      cell_side_[i] = w.side(i) / static_cast<double>(cells_[i]);
      total_ *= cells_[i];
    }
    std::vector<std::size_t> cell_of(pattern.size());
    start_.assign(total_ + 1, 0);
    for (std::size_t k = 0; k < pattern.size(); ++k) {
      cell_of[k] = flat(cell_coords(pattern.points[k]));
      ++start_[cell_of[k] + 1];
    }
    for (std::size_t c = 0; c < total_; ++c) start_[c + 1] += start_[c];
    items_.resize(pattern.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t k = 0; k < pattern.size(); ++k) items_[fill[cell_of[k]]++] = k;
  }

  double radius() const { return radius_; }

  /// Calls f(j) for every point index in the neighbourhood cells of q.
  template <class F>
  void for_each_candidate(const Point& q, F&& f) const {
    const auto home = cell_coords(q);
    std::array<std::array<std::size_t, 3>, kMaxDim> choices{};
    std::array<std::size_t, kMaxDim> n_choices{};
    const bool periodic = pattern_->window.metric() == Metric::periodic;
    for (std::size_t i = 0; i < dim_; ++i) {
      const std::size_t n = cells_[i];
      if (n <= 3) {
        for (std::size_t c = 0; c < n; ++c) choices[i][c] = c;
        n_choices[i] = n;
        continue;
      }
      std::size_t k = 0;
      for (int off = -1; off <= 1; ++off) {
        long c = static_cast<long>(home[i]) + off;
        if (periodic) {
          c = (c + static_cast<long>(n)) % static_cast<long>(n);
        } else if (c < 0 || c >= static_cast<long>(n)) {
          continue;
        }
        choices[i][k++] = static_cast<std::size_t>(c);
      }
      n_choices[i] = k;
    }
    std::array<std::size_t, kMaxDim> odo{};
    while (true) {
      std::size_t cell = 0;
      for (std::size_t i = dim_; i-- > 0;) cell = cell * cells_[i] + choices[i][odo[i]];
      for (std::size_t s = start_[cell]; s < start_[cell + 1]; ++s) f(items_[s]);
      std::size_t i = 0;
      for (; i < dim_; ++i) {
        if (++odo[i] < n_choices[i]) break;
        odo[i] = 0;
      }
      if (i == dim_) break;
    }
  }

  /// Calls f(j, dist) for every point within `r` (<= construction radius) of q.
  template <class F>
  void for_each_within(const Point& q, double r, F&& f) const {
    if (r > radius_) throw InvalidArgument("CellIndex: query radius exceeds index radius");
    // compare sqrt(d2) so that membership agrees exactly with distance()
    const double r2 = r * r * (1 + 1e-12);
    for_each_candidate(q, [&](std::size_t j) {
      const double d2 = distance_sq(q, pattern_->points[j], pattern_->window);
      if (d2 > r2) return;
      const double d = std::sqrt(d2);
      if (d <= r) f(j, d);
    });
  }

  /// Calls f(i, j, dist) for every unordered pair i < j within distance r.
  template <class F>
  void for_each_pair_within(double r, F&& f) const {
    const auto& pts = pattern_->points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for_each_within(pts[i], r, [&](std::size_t j, double d) {
        if (j > i) f(i, j, d);
      });
    }
  }

 private:
  std::array<std::size_t, kMaxDim> cell_coords(const Point& p) const {
    std::array<std::size_t, kMaxDim> c{};
    const Window& w = pattern_->window;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double t = std::floor((p[i] - w.lower()[i]) / cell_side_[i]);
      c[i] = static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(cells_[i] - 1)));
    }
    return c;
  }

  std::size_t flat(const std::array<std::size_t, kMaxDim>& c) const {
    std::size_t cell = 0;
    for (std::size_t i = dim_; i-- > 0;) cell = cell * cells_[i] + c[i];
    return cell;
  }

  const PointPattern* pattern_;
  double radius_;
  std::size_t dim_ = 0;
  std::size_t total_ = 1;
  std::array<std::size_t, kMaxDim> cells_{};
  std::array<double, kMaxDim> cell_side_{};
  std::vector<std::size_t> start_;
  std::vector<std::size_t> items_;
};

}  // namespace ppclust

#endif  // PPCLUST_NEIGHBORS_HPP
