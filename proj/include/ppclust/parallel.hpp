#ifndef PPCLUST_PARALLEL_HPP
#define PPCLUST_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace ppclust {

namespace detail {

inline unsigned default_thread_count() {
  if (const char* env = std::getenv("PPCLUST_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> n{default_thread_count()};
  return n;
}

}  // namespace detail

/// Worker cap for replication loops. Defaults to $PPCLUST_THREADS or the
/// hardware concurrency.
inline unsigned thread_count() { return detail::thread_setting().load(); }
inline void set_thread_count(unsigned n) { detail::thread_setting().store(std::max(1u, n)); }

/// Evaluates fn(0..n-1) on up to thread_count() workers. Results are stored by
/// index, so the output is independent of scheduling.
template <class F>
auto parallel_map(std::size_t n, F&& fn) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<R> out(n);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace ppclust

#endif  // PPCLUST_PARALLEL_HPP
