#pragma once

#include <cstddef>
#include <functional>

namespace airgam {

/// Runs fn(i) for i in [0, n). Tasks must be independent and write only to
/// their own output slots; results are then identical for any thread count.
void parallel_for(std::size_t n, int n_threads, const std::function<void(std::size_t)>& fn);

/// Number of hardware threads, at least 1.
int default_thread_count();

}  // namespace airgam
