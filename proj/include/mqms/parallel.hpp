#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace mqms {

// Number of OpenMP threads used by the parallel kernels. 0 means the OpenMP default.
void set_thread_count(int threads);
int thread_count();

// Sum of term(i) for i in [0, count). The index range is cut into blocks whose
// layout depends only on `count`, blocks are evaluated in parallel and their
// partial sums are added in block order, so the result is bit-identical for any
// thread count.
double deterministic_sum(std::uint64_t count, const std::function<double(std::uint64_t)>& term);

// Same blocking, but each block accumulates into its own length-`width` vector.
void deterministic_vector_sum(std::uint64_t count, std::size_t width,
                              const std::function<void(std::uint64_t, double* acc)>& accumulate,
                              double* out);

// Saturating integer power; returns UINT64_MAX on overflow.
std::uint64_t checked_pow(std::uint64_t base, unsigned exponent);

}  // namespace mqms
