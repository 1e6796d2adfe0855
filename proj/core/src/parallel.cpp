#include "gmc/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "gmc/errors.hpp"

namespace gmc {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void for_each_chunk(std::int64_t count, std::int64_t chunk_size, int workers,
                    const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (count <= 0) return;
  if (chunk_size <= 0) throw Error("for_each_chunk: chunk_size must be positive");

  const std::int64_t n_chunks = (count + chunk_size - 1) / chunk_size;
  const auto run_chunk = [&](std::int64_t c) {
    const std::int64_t begin = c * chunk_size;
    const std::int64_t end = std::min(begin + chunk_size, count);
    fn(begin, end);
  };

  const int n_workers =
      static_cast<int>(std::min<std::int64_t>(resolve_workers(workers), n_chunks));
  if (n_workers <= 1) {
    for (std::int64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= n_chunks || failed.load(std::memory_order_relaxed)) return;
      try {
        run_chunk(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

double sum_chunked(std::int64_t count, std::int64_t chunk_size, int workers,
                   const std::function<double(std::int64_t, std::int64_t)>& partial) {
  if (count <= 0) return 0.0;
  if (chunk_size <= 0) throw Error("sum_chunked: chunk_size must be positive");
  const std::int64_t n_chunks = (count + chunk_size - 1) / chunk_size;
  std::vector<double> partials(static_cast<std::size_t>(n_chunks), 0.0);
  for_each_chunk(count, chunk_size, workers, [&](std::int64_t begin, std::int64_t end) {
    partials[static_cast<std::size_t>(begin / chunk_size)] = partial(begin, end);
  });
  double total = 0.0;
  for (double p : partials) total += p;
  return total;
}

}  // namespace gmc
