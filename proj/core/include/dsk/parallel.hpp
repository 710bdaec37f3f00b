#pragma once

#include <cstddef>
#include <functional>

namespace dsk {

/// Worker cap from the DSK_THREADS environment variable; falls back to the
/// hardware concurrency (at least 1) when unset or unparsable.
std::size_t thread_count_from_env();

/// Splits [0, n) into at most `threads` contiguous chunks and runs
/// `body(begin, end)` on each. Chunk boundaries depend only on (n, threads);
/// callers that write disjoint outputs per index stay bit-deterministic for
/// any thread count.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace dsk
