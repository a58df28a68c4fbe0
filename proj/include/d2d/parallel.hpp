#pragma once

#include <cstddef>
#include <functional>

namespace d2d {

/// Worker count: hardware concurrency, capped by a positive integer in the
/// D2D_THREADS environment variable.
unsigned worker_count();

/// Runs body(0..n-1) on up to worker_count() threads. Indices are handed out
/// dynamically; the first exception thrown by any call is rethrown after all
/// workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace d2d
