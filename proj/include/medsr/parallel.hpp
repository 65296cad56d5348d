#pragma once

#include <cstddef>
#include <functional>

namespace medsr {

/// Resolves a requested worker count: 0 means hardware concurrency.
int resolve_threads(int requested) noexcept;

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Items are
/// independent; callers write results into pre-sized slots so the merge
/// order never depends on scheduling. If any item throws, the exception from
/// the lowest failing index is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace medsr
