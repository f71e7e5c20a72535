#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hubforge {

/// Thread count after applying the HUBFORGE_THREADS override; 0 means "all cores".
int resolve_threads(int requested);

/// Serial reference: results[r] = fn(r) in replicate order.
template <class Result, class Fn>
std::vector<Result> run_replicates_serial(std::size_t count, Fn&& fn) {
  std::vector<Result> results;
  results.reserve(count);
  for (std::size_t r = 0; r < count; ++r) results.push_back(fn(r));
  return results;
}

/// Replicate-parallel kernel. Each replicate writes only its own slot, so the
/// returned vector is identical to the serial reference for any thread count.
/// The exception of the lowest failing replicate is rethrown after the loop.
template <class Result, class Fn>
std::vector<Result> run_replicates(std::size_t count, int threads, Fn&& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || count <= 1) return run_replicates_serial<Result>(count, fn);
  std::vector<Result> results(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long long r = 0; r < n; ++r) {
    try {
      results[static_cast<std::size_t>(r)] = fn(static_cast<std::size_t>(r));
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace hubforge
