#pragma once

#include <cstddef>
#include <functional>

namespace thickstab {

// Worker count: THICKSTAB_THREADS if set and positive, else hardware concurrency.
unsigned thread_budget();

// Runs body(i) for i in [0, count) on up to thread_budget() threads. Each
// index is handled exactly once; the first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace thickstab
