#include "mqms/parallel.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include <omp.h>

namespace mqms {

namespace {

int g_threads = 0;

constexpr std::uint64_t kMinBlock = 256;
constexpr std::uint64_t kMaxBlocks = 1024;

std::uint64_t block_size_for(std::uint64_t count) {
    return std::max(kMinBlock, (count + kMaxBlocks - 1) / kMaxBlocks);
}

}  // namespace

void set_thread_count(int threads) {
    g_threads = std::max(threads, 0);
    if (g_threads > 0) omp_set_num_threads(g_threads);
}

int thread_count() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

double deterministic_sum(std::uint64_t count, const std::function<double(std::uint64_t)>& term) {
    if (count == 0) return 0.0;
    const std::uint64_t block = block_size_for(count);
    const auto blocks = static_cast<std::int64_t>((count + block - 1) / block);
    std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);

#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::int64_t b = 0; b < blocks; ++b) {
        const std::uint64_t lo = static_cast<std::uint64_t>(b) * block;
        const std::uint64_t hi = std::min(count, lo + block);
        double s = 0.0;
        for (std::uint64_t i = lo; i < hi; ++i) s += term(i);
        partial[static_cast<std::size_t>(b)] = s;
    }

    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

void deterministic_vector_sum(std::uint64_t count, std::size_t width,
                              const std::function<void(std::uint64_t, double* acc)>& accumulate,
                              double* out) {
    std::fill(out, out + width, 0.0);
    if (count == 0) return;
    const std::uint64_t block = block_size_for(count);
    const auto blocks = static_cast<std::int64_t>((count + block - 1) / block);
    std::vector<double> partial(static_cast<std::size_t>(blocks) * width, 0.0);

#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::int64_t b = 0; b < blocks; ++b) {
        const std::uint64_t lo = static_cast<std::uint64_t>(b) * block;
        const std::uint64_t hi = std::min(count, lo + block);
        double* acc = partial.data() + static_cast<std::size_t>(b) * width;
        for (std::uint64_t i = lo; i < hi; ++i) accumulate(i, acc);
    }

    for (std::int64_t b = 0; b < blocks; ++b)
        for (std::size_t j = 0; j < width; ++j) out[j] += partial[static_cast<std::size_t>(b) * width + j];
}

std::uint64_t checked_pow(std::uint64_t base, unsigned exponent) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t result = 1;
    for (unsigned i = 0; i < exponent; ++i) {
        if (base != 0 && result > kMax / base) return kMax;
        result *= base;
    }
    return result;
}

}  // namespace mqms
