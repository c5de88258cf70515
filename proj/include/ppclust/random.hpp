#ifndef PPCLUST_RANDOM_HPP
#define PPCLUST_RANDOM_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "core.hpp"

namespace ppclust {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

using Engine = std::mt19937_64;

/// Hierarchical, counter-based random stream. A stream is identified by
/// (master_seed, path); derive(i) appends i to the path. The engine seed is a
/// hash of the full identity, so output never depends on call order.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t master_seed = 0) : seed_(master_seed) {}

  RandomStream derive(std::uint64_t i) const {
    RandomStream child = *this;
    child.path_.push_back(i);
    return child;
  }

  std::uint64_t master_seed() const { return seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

  std::uint64_t key() const {
    std::uint64_t h = detail::splitmix64(seed_);
    for (std::uint64_t p : path_) h = detail::splitmix64(h ^ detail::splitmix64(p + 0x632be59bd9b4e019ULL));
    return h;
  }

  Engine engine() const { return Engine(key()); }

  friend bool operator==(const RandomStream&, const RandomStream&) = default;

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
};

inline double uniform01(Engine& eng) { return std::uniform_real_distribution<double>(0.0, 1.0)(eng); }

/// Uniform point in the window (half-open).
inline Point uniform_in(const Window& w, Engine& eng) {
  Point p(w.dim());
  for (std::size_t i = 0; i < w.dim(); ++i) {
    p[i] = w.lower()[i] + uniform01(eng) * w.side(i);
    if (p[i] >= w.upper()[i]) p[i] = w.lower()[i];
  }
  return p;
}

/// Uniform point in the d-ball of the given radius centred at the origin.
inline Point uniform_in_ball(std::size_t d, double radius, Engine& eng) {
  std::normal_distribution<double> n01;
  Point p(d);
  double norm = 0;
  do {
    norm = 0;
    for (std::size_t i = 0; i < d; ++i) {
      p[i] = n01(eng);
      norm += p[i] * p[i];
    }
  } while (norm == 0);
  norm = std::sqrt(norm);
  const double r = radius * std::pow(uniform01(eng), 1.0 / static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) p[i] *= r / norm;
  return p;
}

}  // namespace ppclust

#endif  // PPCLUST_RANDOM_HPP
