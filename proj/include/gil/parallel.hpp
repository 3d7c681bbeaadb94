#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace gil {

/// Default worker count: $GIL_WORKERS if set and positive, else 1.
unsigned default_workers();

/// Runs produce(i) for i in [0, n) on up to `workers` threads and feeds the
/// results to consume(i, result) strictly in index order on the calling
/// thread. Work proceeds in waves of `workers` tasks, so at most `workers`
/// results are held at once. The first exception (lowest index) is rethrown.
template <typename Produce, typename Consume>
void ordered_parallel(std::size_t n, unsigned workers, Produce &&produce, Consume &&consume) {
  using Result = decltype(produce(std::size_t{}));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      consume(i, produce(i));
    return;
  }
  for (std::size_t base = 0; base < n; base += workers) {
    const std::size_t count = std::min<std::size_t>(workers, n - base);
    std::vector<std::optional<Result>> results(count);
    std::vector<std::exception_ptr> errors(count);
    {
      std::vector<std::jthread> pool;
      pool.reserve(count);
      for (std::size_t j = 0; j < count; ++j)
        pool.emplace_back([&, j] {
          try {
            results[j].emplace(produce(base + j));
          } catch (...) {
            errors[j] = std::current_exception();
          }
        });
    }
    for (std::size_t j = 0; j < count; ++j) {
      if (errors[j])
        std::rethrow_exception(errors[j]);
      consume(base + j, std::move(*results[j]));
    }
  }
}

} // namespace gil
