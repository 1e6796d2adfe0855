#pragma once

#include <cstdint>
#include <functional>

namespace gmc {

/// Maps 0 to std::thread::hardware_concurrency(), everything else to itself.
int resolve_workers(int requested);

/// Calls fn(begin, end) once per fixed-size chunk of [0, count). Chunk
/// boundaries depend only on count and chunk_size, never on the worker
/// count, so any write pattern that partitions its output by chunk yields
/// bit-identical results for 1..n workers. Exceptions thrown by fn are
/// rethrown on the calling thread.
void for_each_chunk(std::int64_t count, std::int64_t chunk_size, int workers,
                    const std::function<void(std::int64_t, std::int64_t)>& fn);

/// Deterministic reduction: per-chunk partial sums combined in ascending
/// chunk order regardless of which worker produced them.
double sum_chunked(std::int64_t count, std::int64_t chunk_size, int workers,
                   const std::function<double(std::int64_t, std::int64_t)>& partial);

}  // namespace gmc
