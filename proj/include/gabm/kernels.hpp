#pragma once

// Per-sample evaluation with a serial reference path and an OpenMP path.
// Both produce identical results: each index is computed independently and
// written to its own slot; the first failing index (lowest) is rethrown.

#include <cstddef>
#include <exception>
#include <string>
#include <type_traits>
#include <vector>

namespace gabm {

enum class Exec { serial, parallel };

inline const char* to_string(Exec e) { return e == Exec::serial ? "serial" : "parallel"; }

template <class Fn>
auto evaluate_all(std::size_t count, Fn&& fn, Exec exec = Exec::parallel) {
  using R = std::decay_t<decltype(fn(std::size_t{0}))>;
  std::vector<R> out(count);
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace gabm
