#ifndef STAPCRB_PARALLEL_HPP
#define STAPCRB_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

namespace stapcrb {

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index must
/// write only its own output slot. If any body throws, the exception from the
/// lowest index is rethrown after the loop.
template <class Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
  if (workers < 1) workers = 1;
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Sums in a fixed pairwise tree; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace stapcrb

#endif  // STAPCRB_PARALLEL_HPP
