#pragma once

#include <cstddef>
#include <functional>

namespace gxm {

/// Process-wide thread budget used by the parallel loops in the library.
/// Defaults to 1. Results never depend on the budget beyond floating-point
/// merge order, and most loops are written so that they do not at all.
void set_thread_budget(std::size_t threads);
std::size_t thread_budget();

/// Runs body(i) for i in [0, count). Each index runs exactly once; indices are
/// split into contiguous blocks, one per worker.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace gxm
