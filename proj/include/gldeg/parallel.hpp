#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace gldeg {

// Caps the OpenMP thread count; reads GLDEG_THREADS on first use.
void init_threads();
int thread_count();

// Parallel loop over [0, n); body must only write disjoint slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Deterministic pairwise reduction; result is independent of thread count.
double pairwise_sum(const std::vector<double>& v);

} // namespace gldeg
