#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace nodal {

/// Worker count: NODAL_THREADS if set to a positive integer, otherwise the
/// hardware concurrency. Read on every call so tests can change it.
int worker_count();

/// Fixed chunk length used by every deterministic reduction. Chunk boundaries
/// depend only on the problem size, never on the worker count.
inline constexpr std::size_t kChunkSize = 4096;

/// Calls body(chunk_index, begin, end) once for each chunk of [0, count).
/// Chunks run concurrently on up to worker_count() threads. If any call throws,
/// the exception from the lowest-indexed failing chunk is rethrown.
void for_each_chunk(std::size_t count, std::size_t chunk_size,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t count, std::size_t chunk_size) {
    return (count + chunk_size - 1) / chunk_size;
}

/// Maps each chunk to a partial result, then returns the partials in chunk order.
template <class Partial, class Fn>
std::vector<Partial> map_chunks(std::size_t count, std::size_t chunk_size, Fn&& fn) {
    std::vector<Partial> partials(chunk_count(count, chunk_size));
    for_each_chunk(count, chunk_size, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        partials[chunk] = fn(begin, end);
    });
    return partials;
}

}  // namespace nodal
