#pragma once

#include <cstddef>
#include <functional>

namespace rzl {

/// Worker count: RZL_THREADS if set to a positive integer, else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Indices are
/// handed out dynamically; the first exception thrown is rethrown here.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rzl
