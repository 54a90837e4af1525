#pragma once

#include <functional>

namespace spiral {

// Runs body(i) for i in [0, n) on up to `threads` workers (0: hardware concurrency).
// Each index is processed exactly once; results must be written to per-index slots so the
// outcome does not depend on scheduling. The first exception thrown is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace spiral
