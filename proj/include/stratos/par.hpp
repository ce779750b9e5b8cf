// Thin OpenMP layer. All reductions are blocked: the index range is cut into
// fixed-size chunks, each chunk is accumulated serially, and the per-chunk
// partials are combined in chunk order. Results are therefore identical for
// any thread count, including 1 (the serial path is the same code).
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stratos::par {

inline constexpr std::size_t kChunk = 2048;

/// Caps the worker count for subsequent parallel regions. 0 restores the
/// hardware default.
void set_threads(int n);
int threads();

namespace detail {
inline std::size_t num_chunks(std::size_t n, std::size_t chunk) {
  return n == 0 ? 0 : (n + chunk - 1) / chunk;
}
}  // namespace detail

/// f(begin, end) over consecutive chunks of [0, n). Chunk boundaries depend
/// only on n, never on the thread count.
template <class F>
void for_chunks(std::size_t n, F&& f, std::size_t chunk = kChunk) {
  const std::size_t m = detail::num_chunks(n, chunk);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads())
#endif
  for (long long c = 0; c < static_cast<long long>(m); ++c) {
    const std::size_t b = static_cast<std::size_t>(c) * chunk;
    const std::size_t e = b + chunk < n ? b + chunk : n;
    f(b, e);
  }
}

/// Parallel map: f(i) for i in [0, n). f must only write to its own slot.
template <class F>
void for_each_index(std::size_t n, F&& f) {
  for_chunks(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) f(i);
  });
}

/// Deterministic sum of g(i) over [0, n): per-chunk serial sums combined in
/// chunk order.
template <class G>
double sum(std::size_t n, G&& g, std::size_t chunk = kChunk) {
  const std::size_t m = detail::num_chunks(n, chunk);
  std::vector<double> partial(m, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads())
#endif
  for (long long c = 0; c < static_cast<long long>(m); ++c) {
    const std::size_t b = static_cast<std::size_t>(c) * chunk;
    const std::size_t e = b + chunk < n ? b + chunk : n;
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += g(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

/// Deterministic reduction over [0, n) into an accumulator type A.
/// init() -> A, accumulate(A&, i), combine(A&, const A&) in chunk order.
template <class A, class Init, class Acc, class Comb>
A reduce(std::size_t n, Init&& init, Acc&& accumulate, Comb&& combine,
         std::size_t chunk = kChunk) {
  const std::size_t m = detail::num_chunks(n, chunk);
  std::vector<A> partial;
  partial.reserve(m);
  for (std::size_t c = 0; c < m; ++c) partial.push_back(init());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads())
#endif
  for (long long c = 0; c < static_cast<long long>(m); ++c) {
    const std::size_t b = static_cast<std::size_t>(c) * chunk;
    const std::size_t e = b + chunk < n ? b + chunk : n;
    A& acc = partial[static_cast<std::size_t>(c)];
    for (std::size_t i = b; i < e; ++i) accumulate(acc, i);
  }
  A total = init();
  for (const A& p : partial) combine(total, p);
  return total;
}

}  // namespace stratos::par
