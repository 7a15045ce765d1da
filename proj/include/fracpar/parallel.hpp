#pragma once

#include <cstddef>
#include <functional>

namespace fracpar {

/// Worker count: FRACPAR_THREADS when set and positive, else the hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads with static
/// contiguous chunks. Results written to disjoint slots are deterministic.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fracpar
