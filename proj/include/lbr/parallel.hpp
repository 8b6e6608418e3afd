#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lbr {

/// How a replicate-level kernel is executed. `serial` is the reference
/// path kept for testing; `openmp` must produce bit-identical output.
struct Execution {
  enum class Mode { serial, openmp };
  Mode mode = Mode::openmp;
  int threads = 0;  ///< 0 = OpenMP default

  static Execution serial() { return {Mode::serial, 1}; }
  static Execution parallel(int threads = 0) { return {Mode::openmp, threads}; }
};

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Runs body(i) for i in [0, n). Each index must write only its own output
/// slot; scheduling then has no influence on results. If bodies throw, the
/// exception from the lowest failing index is rethrown, as in a serial loop.
template <class Body>
void for_each_index(std::size_t n, const Execution& exec, Body&& body) {
  if (exec.mode == Execution::Mode::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#ifdef _OPENMP
  const int threads = exec.threads > 0 ? exec.threads : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(n);
  std::mutex guard;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (static_cast<std::size_t>(i) < failed_index) {
        failed_index = static_cast<std::size_t>(i);
        failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
#else
  for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace lbr
