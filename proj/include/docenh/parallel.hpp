#pragma once

#include <cstddef>
#include <functional>

namespace docenh {

/// Calls `body(i)` for every i in [0, count) on up to `jobs` worker threads
/// (the calling thread included). Indices are handed out dynamically; the
/// caller is responsible for writing results into per-index slots. The first
/// exception thrown by `body` is rethrown after all workers stop.
void parallel_for_index(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

/// std::thread::hardware_concurrency(), at least 1.
int default_jobs();

}  // namespace docenh
