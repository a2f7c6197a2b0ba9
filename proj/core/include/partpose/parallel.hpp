#pragma once

#include <cstddef>
#include <functional>

namespace partpose {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// processed exactly once; callers keep determinism by writing to
/// per-index slots and reducing in a fixed order afterwards.
/// threads <= 0 selects the hardware concurrency.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Resolved worker count for a `--threads` style flag.
int resolve_threads(int requested);

}  // namespace partpose
