#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace rass::detail {

/// Runs fn(i) for i in [0, n) with an OpenMP parallel for. Exceptions are
/// captured per index and the one with the lowest index is rethrown, so the
/// observable behaviour matches a serial loop that stops at the first error.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace rass::detail
