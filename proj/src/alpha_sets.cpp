#include "mqms/alpha_sets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>


#include "mqms/error.hpp"
#include "mqms/parallel.hpp"

namespace mqms {

namespace {

void check_args(int max_capacity, int queues) {
    if (max_capacity < 1) throw ModelError("M must be at least 1");
    if (queues < 2) throw ModelError("N must be at least 2");
}

// linked[i*N + j]: alpha_i * m == alpha_j * n for some m, n in {1..M}.
template <typename Ratio>
bool partition_condition(std::size_t count, const std::vector<bool>& nonzero, Ratio linked) {
    if (count < 2) return true;
    std::vector<char> link(count * count, 0);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = i + 1; j < count; ++j)
            if (nonzero[i] && nonzero[j] && linked(i, j)) link[i * count + j] = link[j * count + i] = 1;

    // Unordered bipartitions: the last coordinate always sits in the complement.
    const std::uint64_t masks = std::uint64_t{1} << (count - 1);
    for (std::uint64_t mask = 1; mask < masks; ++mask) {
        bool side_nonzero = false;
        bool other_nonzero = false;
        for (std::size_t i = 0; i < count; ++i) {
            if (!nonzero[i]) continue;
            if ((mask >> i) & 1U) side_nonzero = true;
            else other_nonzero = true;
        }
        if (!side_nonzero || !other_nonzero) continue;

        bool crossed = false;
        for (std::size_t i = 0; i < count && !crossed; ++i) {
            if (!((mask >> i) & 1U)) continue;
            for (std::size_t j = 0; j < count; ++j)
                if (!((mask >> j) & 1U) && link[i * count + j]) {
                    crossed = true;
                    break;
                }
        }
        if (!crossed) return false;
    }
    return true;
}

void check_alpha(std::size_t nonzero_count, std::size_t size) {
    if (size == 0 || nonzero_count == 0) throw ModelError("direction vector must not be zero");
    if (size > 62) throw ModelError("direction vector too long for bipartition enumeration");
}

struct Candidates {
    std::vector<std::int64_t> w;
    int queues;
    std::uint64_t total;

    void decode(std::uint64_t index, std::vector<std::int64_t>& out) const {
        const auto base = static_cast<std::uint64_t>(w.size());
        for (int n = 0; n < queues; ++n) {
            out[static_cast<std::size_t>(n)] = w[index % base];
            index /= base;
        }
    }
};

Candidates candidates(int max_capacity, int queues, const EnumerationCaps& caps) {
    check_args(max_capacity, queues);
    Candidates c{build_W(max_capacity, queues), queues, 0};
    c.total = checked_pow(c.w.size(), static_cast<unsigned>(queues));
    if (c.total > caps.vhat) {
        std::ostringstream os;
        os << "|W|^N = " << c.total << " exceeds cap " << caps.vhat;
        throw CapExceeded(os.str());
    }
    return c;
}

// Index 0 is the zero vector (W is sorted and starts at 0).
void scan(const Candidates& c, int max_capacity, std::uint64_t lo, std::uint64_t hi, std::vector<AlphaVector>& out) {
    std::vector<std::int64_t> alpha(static_cast<std::size_t>(c.queues));
    for (std::uint64_t idx = std::max<std::uint64_t>(lo, 1); idx < hi; ++idx) {
        c.decode(idx, alpha);
        if (in_V(std::span<const std::int64_t>(alpha), max_capacity)) out.push_back(canonical(AlphaVector{alpha}));
    }
}

std::vector<AlphaVector> sorted_unique(std::vector<AlphaVector> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

bool AlphaVector::is_zero() const {
    return std::all_of(coords.begin(), coords.end(), [](std::int64_t c) { return c == 0; });
}

std::vector<double> AlphaVector::as_real() const { return {coords.begin(), coords.end()}; }

AlphaVector canonical(AlphaVector alpha) {
    std::int64_t g = 0;
    for (auto c : alpha.coords) g = std::gcd(g, c);
    if (g > 1)
        for (auto& c : alpha.coords) c /= g;
    return alpha;
}

std::vector<std::int64_t> build_W(int max_capacity, int queues) {
    check_args(max_capacity, queues);
    std::set<std::int64_t> products{0, 1};
    std::set<std::int64_t> frontier{1};
    // Nonzero products of exactly j factors from {1..M}; zero factors only add 0.
    for (int j = 0; j < queues - 1; ++j) {
        std::set<std::int64_t> next;
        for (auto p : frontier)
            for (int m = 1; m <= max_capacity; ++m) next.insert(p * m);
        frontier = std::move(next);
    }
    products.insert(frontier.begin(), frontier.end());
    return {products.begin(), products.end()};
}

std::uint64_t wn_count(int max_capacity, int queues) {
    check_args(max_capacity, queues);
    // (M+N-2 choose N-1) computed incrementally; exact at each step.
    std::uint64_t binom = 1;
    const auto top = static_cast<std::uint64_t>(max_capacity + queues - 2);
    const auto r = static_cast<std::uint64_t>(queues - 1);
    for (std::uint64_t i = 1; i <= r; ++i) binom = binom * (top - r + i) / i;
    return checked_pow(binom + 1, static_cast<unsigned>(queues));
}

bool in_V(std::span<const std::int64_t> alpha, int max_capacity) {
    std::vector<bool> nonzero(alpha.size());
    std::size_t nz = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] < 0) throw ModelError("direction vector must be nonnegative");
        nonzero[i] = alpha[i] != 0;
        nz += nonzero[i];
    }
    check_alpha(nz, alpha.size());
    const std::int64_t M = max_capacity;
    return partition_condition(alpha.size(), nonzero, [&](std::size_t i, std::size_t j) {
        for (std::int64_t m = 1; m <= M; ++m) {
            const std::int64_t lhs = alpha[i] * m;
            if (lhs % alpha[j] == 0) {
                const std::int64_t n = lhs / alpha[j];
                if (n >= 1 && n <= M) return true;
            }
        }
        return false;
    });
}

bool in_V(std::span<const double> alpha, int max_capacity) {
    std::vector<bool> nonzero(alpha.size());
    std::size_t nz = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (!(alpha[i] >= 0.0)) throw ModelError("direction vector must be nonnegative");
        nonzero[i] = alpha[i] != 0.0;
        nz += nonzero[i];
    }
    check_alpha(nz, alpha.size());
    return partition_condition(alpha.size(), nonzero, [&](std::size_t i, std::size_t j) {
        for (int m = 1; m <= max_capacity; ++m)
            for (int n = 1; n <= max_capacity; ++n) {
                const double lhs = alpha[i] * m;
                const double rhs = alpha[j] * n;
                if (std::abs(lhs - rhs) <= 1e-12 * std::max(lhs, rhs)) return true;
            }
        return false;
    });
}

std::vector<AlphaVector> build_Vhat(int max_capacity, int queues, const EnumerationCaps& caps) {
    const Candidates c = candidates(max_capacity, queues, caps);

    constexpr std::uint64_t kChunk = 4096;
    const auto chunks = static_cast<std::int64_t>((c.total + kChunk - 1) / kChunk);
    std::vector<std::vector<AlphaVector>> found(static_cast<std::size_t>(chunks));

#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
    for (std::int64_t b = 0; b < chunks; ++b) {
        const std::uint64_t lo = static_cast<std::uint64_t>(b) * kChunk;
        auto& local = found[static_cast<std::size_t>(b)];
        scan(c, max_capacity, lo, std::min(c.total, lo + kChunk), local);
        local = sorted_unique(std::move(local));
    }

    std::vector<AlphaVector> all;
    for (auto& f : found) all.insert(all.end(), std::make_move_iterator(f.begin()), std::make_move_iterator(f.end()));
    return sorted_unique(std::move(all));
}

namespace serial {

std::vector<AlphaVector> build_Vhat(int max_capacity, int queues, const EnumerationCaps& caps) {
    const Candidates c = candidates(max_capacity, queues, caps);
    std::vector<AlphaVector> out;
    scan(c, max_capacity, 0, c.total, out);
    return sorted_unique(std::move(out));
}

}  // namespace serial

}  // namespace mqms
