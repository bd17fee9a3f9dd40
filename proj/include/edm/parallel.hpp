#pragma once

#include <cstddef>
#include <functional>

namespace edm {

/// Runs body(i) for i in [0, n) on up to `jobs` threads (jobs <= 0: hardware
/// concurrency). Nested calls from inside a worker run serially. Every body
/// writes only its own output slot, so results do not depend on scheduling.
/// The first exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace edm
