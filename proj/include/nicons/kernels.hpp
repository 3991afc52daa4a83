#pragma once

// Data-parallel reduction kernels shared by the verification routines.
//
// Every kernel has a serial reference and an OpenMP version. Both evaluate
// the same per-index function and break ties towards the lowest index, so
// the two produce bit-identical results; the serial path is what the tests
// compare against.

#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nicons {

enum class Execution { kSerial, kParallel };

struct ArgMax {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t index = 0;
  std::size_t count = 0;
};

namespace kernels {

namespace internal {

// NaN counts as the worst possible value so that a poisoned sample can never
// hide behind a finite one.
inline double sanitize(double v) {
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

inline void consider(ArgMax& best, double v, std::size_t i) {
  if (best.count == 0 || v > best.value) {
    best.value = v;
    best.index = i;
  }
  ++best.count;
}

inline void merge(ArgMax& into, const ArgMax& other) {
  if (other.count == 0) return;
  if (into.count == 0 || other.value > into.value ||
      (other.value == into.value && other.index < into.index)) {
    into.value = other.value;
    into.index = other.index;
  }
  into.count += other.count;
}

}  // namespace internal

template <class F>
ArgMax argmax_serial(std::size_t n, F&& f) {
  ArgMax best;
  for (std::size_t i = 0; i < n; ++i) {
    internal::consider(best, internal::sanitize(f(i)), i);
  }
  return best;
}

template <class F>
ArgMax argmax_parallel(std::size_t n, F&& f) {
  ArgMax best;
  const auto count = static_cast<std::ptrdiff_t>(n);
  std::exception_ptr error;
#pragma omp parallel
  {
    ArgMax local;
    std::exception_ptr local_error;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      if (local_error) continue;
      try {
        internal::consider(local, internal::sanitize(f(static_cast<std::size_t>(i))),
                           static_cast<std::size_t>(i));
      } catch (...) {
        local_error = std::current_exception();
      }
    }
#pragma omp critical(nicons_argmax_merge)
    {
      internal::merge(best, local);
      if (local_error && !error) error = local_error;
    }
  }
  if (error) std::rethrow_exception(error);
  return best;
}

template <class F>
ArgMax argmax(std::size_t n, Execution exec, F&& f) {
  return exec == Execution::kParallel ? argmax_parallel(n, std::forward<F>(f))
                                      : argmax_serial(n, std::forward<F>(f));
}

// Minimum via exact negation; NaN samples report as -inf.
template <class F>
ArgMax argmin(std::size_t n, Execution exec, F&& f) {
  ArgMax r = argmax(n, exec, [&](std::size_t i) { return -f(i); });
  r.value = -r.value;
  return r;
}

// Runs body(i) for every i. If any iteration throws, the exception from the
// lowest failing index is rethrown after the loop completes.
template <class F>
void parallel_for(std::size_t n, Execution exec, F&& body) {
  if (exec == Execution::kSerial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const auto count = static_cast<std::ptrdiff_t>(n);
  std::exception_ptr error;
  std::size_t error_index = n;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(nicons_parallel_for_error)
      {
        if (static_cast<std::size_t>(i) < error_index) {
          error_index = static_cast<std::size_t>(i);
          error = std::current_exception();
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace kernels
}  // namespace nicons
