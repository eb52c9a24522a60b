#pragma once

#include <cstddef>
#include <functional>

namespace obsgram {

/// Calls fn(i) for every i in [0, count) on up to `threads` workers
/// (threads <= 1 runs inline). Results must be written to per-index slots
/// so the outcome does not depend on scheduling. If several calls throw,
/// the exception from the smallest index is rethrown.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace obsgram
