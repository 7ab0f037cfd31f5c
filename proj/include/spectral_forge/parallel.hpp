#pragma once

#include <cstddef>
#include <functional>

namespace spectral_forge {

/// Worker count: SPECTRAL_FORGE_THREADS if set to a positive integer, otherwise
/// the hardware concurrency. Read on every call.
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Each index is written by exactly one worker, so
/// results stored per index are independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace spectral_forge
