#pragma once

#include <cstddef>
#include <functional>

namespace rdpg {

/// Resolves a requested worker count: 0 means "all hardware threads".
unsigned resolve_threads(unsigned requested) noexcept;

/// Runs body(k) for k in [0, count) on up to `threads` workers. Work items
/// are claimed dynamically; callers must write results into preallocated
/// per-item slots so the outcome is independent of scheduling. The first
/// exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace rdpg
