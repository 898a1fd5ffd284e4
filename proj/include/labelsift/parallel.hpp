#pragma once

#include <cstddef>
#include <functional>

namespace labelsift {

/// Thread budget: LABELSIFT_THREADS when set, else `requested` when non-zero,
/// else the hardware concurrency.
[[nodiscard]] std::size_t resolve_thread_budget(std::size_t requested);

/// Runs task(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)> &task);

}  // namespace labelsift
