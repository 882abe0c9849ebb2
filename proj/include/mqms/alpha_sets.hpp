#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "mqms/channel_model.hpp"

namespace mqms {

/// Nonnegative integer direction vector. Canonical vectors have gcd 1 over their nonzero coordinates.
struct AlphaVector {
    std::vector<std::int64_t> coords;

    std::size_t size() const { return coords.size(); }
    bool is_zero() const;
    std::vector<double> as_real() const;

    auto operator<=>(const AlphaVector&) const = default;
};

// Divides by the gcd of the nonzero coordinates. The zero vector is returned unchanged.
AlphaVector canonical(AlphaVector alpha);

// Distinct products of (N-1) factors drawn with repetition from {0, ..., M}, ascending.
std::vector<std::int64_t> build_W(int max_capacity, int queues);

// Closed form ((M+N-2 choose N-1) + 1)^N; saturates at UINT64_MAX.
std::uint64_t wn_count(int max_capacity, int queues);

// Partition condition: for every bipartition of the coordinates with a nonzero
// entry on both sides, some nonzero pair (i, j) across it satisfies
// alpha_i * m == alpha_j * n with m, n in {1, ..., M}. Exact for integers.
bool in_V(std::span<const std::int64_t> alpha, int max_capacity);
// Real-valued overload; the ratio test uses a 1e-12 relative tolerance.
bool in_V(std::span<const double> alpha, int max_capacity);

/**
 * Scaling-free direction set V-hat: every nonzero vector of W^N passing in_V,
 * reduced by gcd and deduplicated. Sorted lexicographically.
 *
 * Candidates are scanned in parallel; the result does not depend on thread count.
 * Throws CapExceeded when |W|^N exceeds caps.vhat.
 */
std::vector<AlphaVector> build_Vhat(int max_capacity, int queues, const EnumerationCaps& caps = {});

namespace serial {

// Single-threaded reference for build_Vhat.
std::vector<AlphaVector> build_Vhat(int max_capacity, int queues, const EnumerationCaps& caps = {});

}  // namespace serial

}  // namespace mqms
