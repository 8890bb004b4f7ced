#pragma once

#include <cstddef>
#include <functional>

namespace nlmc {

// 0 maps to std::thread::hardware_concurrency() (at least 1).
unsigned resolve_threads(unsigned requested);

// Runs body(i) for i in [0, count) on up to `threads` workers. Work is
// claimed dynamically; callers write results into per-index slots so the
// outcome does not depend on scheduling. If any call throws, the exception
// from the smallest failing index is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace nlmc
