#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ifsrecur {

/// Worker cap for all parallel loops. 0 selects hardware concurrency.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(chunk, begin, end) over [0, count) split into fixed chunks of
/// `grain` items. Chunk boundaries depend only on count and grain, so any
/// reduction done in chunk order is identical for every thread count.
void parallel_chunks(std::size_t count, std::size_t grain,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t count, std::size_t grain) {
  return grain == 0 ? 0 : (count + grain - 1) / grain;
}

/// Per-chunk partial results folded left to right.
template <typename T, typename Map, typename Fold>
T parallel_reduce(std::size_t count, std::size_t grain, T init, Map map, Fold fold) {
  std::vector<T> partial(chunk_count(count, grain), init);
  parallel_chunks(count, grain, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    partial[chunk] = map(begin, end);
  });
  T acc = init;
  for (const T& p : partial) acc = fold(acc, p);
  return acc;
}

}  // namespace ifsrecur
