#pragma once

#include "lapvard/types.hpp"

#include <functional>

namespace lapvard {

// Worker count for the data-parallel loops below. Every loop partitions its
// index range into contiguous chunks and each chunk writes disjoint output
// slots, so results are bit-identical for any thread count.
void set_num_threads(int n);
int num_threads();

// Runs fn(begin, end) over a partition of [0, n).
void parallel_for(Index n, const std::function<void(Index, Index)>& fn);

}  // namespace lapvard
