#pragma once

#include <cstddef>
#include <functional>

namespace dgs {

/// Calls fn(i) for i in [0, n). Work item i goes to worker i mod threads;
/// threads <= 1 runs inline. The first exception thrown by any worker is
/// rethrown after all workers have joined.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// Hardware concurrency, at least 1.
std::size_t default_threads();

}  // namespace dgs
