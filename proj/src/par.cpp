#include "stratos/par.hpp"

#include <atomic>
#include <thread>

namespace stratos::par {

namespace {
std::atomic<int> g_threads{0};
}

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int threads() {
  int n = g_threads.load();
  if (n > 0) return n;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
#endif
}

}  // namespace stratos::par
