#include "mqms/capacity_region.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "mqms/error.hpp"
#include "mqms/parallel.hpp"

namespace mqms {

namespace {

constexpr std::uint64_t kBruteForceCap = 4096;

void check_alpha(const DiscreteChannelModel& model, std::span<const double> alpha) {
    if (alpha.size() != static_cast<std::size_t>(model.queues))
        throw ModelError("direction vector length does not match the number of queues");
    bool any = false;
    for (double a : alpha) {
        if (!(a >= 0.0)) throw ModelError("direction vector must be nonnegative");
        any = any || a > 0.0;
    }
    if (!any) throw ModelError("direction vector must not be zero");
}

std::uint64_t column_count(const DiscreteChannelModel& model, const EnumerationCaps& caps) {
    if (model.queues > 64) throw CapExceeded("per-server enumeration supports at most 64 queues");
    const std::uint64_t total =
        checked_pow(static_cast<std::uint64_t>(model.max_capacity) + 1, static_cast<unsigned>(model.queues));
    if (total > caps.states) {
        std::ostringstream os;
        os << "column state space " << total << " exceeds cap " << caps.states;
        throw CapExceeded(os.str());
    }
    return total;
}

// Probability of column `index` (mixed radix, queue 0 least significant) of
// server k, with the decoded capacities written to `col`.
double column_state(const DiscreteChannelModel& model, int k, std::uint64_t index, int* col) {
    const auto base = static_cast<std::uint64_t>(model.max_capacity) + 1;
    double p = 1.0;
    for (int n = 0; n < model.queues; ++n) {
        col[n] = static_cast<int>(index % base);
        index /= base;
        p *= model.link_probability(n, k, col[n]);
    }
    return p;
}

double column_max(std::span<const double> alpha, const int* col, int queues) {
    double best = 0.0;
    for (int n = 0; n < queues; ++n) best = std::max(best, alpha[static_cast<std::size_t>(n)] * col[n]);
    return best;
}

// Index of the maximizing queue under the tie rule.
int column_argmax(std::span<const double> alpha, const int* col, int queues, TieRule tie) {
    int best = tie == TieRule::lowest_index ? 0 : queues - 1;
    double best_w = alpha[static_cast<std::size_t>(best)] * col[best];
    for (int n = 0; n < queues; ++n) {
        const double w = alpha[static_cast<std::size_t>(n)] * col[n];
        if (w > best_w || (tie == TieRule::highest_index && w == best_w)) {
            best = n;
            best_w = w;
        }
    }
    return best;
}

double state_value(std::span<const double> alpha, const ChannelMatrix& c) {
    double v = 0.0;
    for (int k = 0; k < c.cols(); ++k) {
        double best = 0.0;
        for (int n = 0; n < c.rows(); ++n) best = std::max(best, alpha[static_cast<std::size_t>(n)] * c(n, k));
        v += best;
    }
    return v;
}

}  // namespace

double support_function(const DiscreteChannelModel& model, std::span<const double> alpha, const EnumerationCaps& caps) {
    check_alpha(model, alpha);
    if (model.kind == ChannelKind::explicit_joint) {
        return deterministic_sum(model.states.size(), [&](std::uint64_t s) {
            const auto& st = model.states[s];
            return st.probability * state_value(alpha, st.matrix);
        });
    }
    const std::uint64_t columns = column_count(model, caps);
    double total = 0.0;
    for (int k = 0; k < model.servers; ++k) {
        total += deterministic_sum(columns, [&](std::uint64_t i) {
            int col[64] = {};
            const double p = column_state(model, k, i, col);
            return p == 0.0 ? 0.0 : p * column_max(alpha, col, model.queues);
        });
    }
    return total;
}

double support_function(const DiscreteChannelModel& model, const AlphaVector& alpha, const EnumerationCaps& caps) {
    const auto a = alpha.as_real();
    return support_function(model, std::span<const double>(a), caps);
}

RatePoint support_vertex(const DiscreteChannelModel& model, std::span<const double> alpha, TieRule tie,
                         const EnumerationCaps& caps) {
    check_alpha(model, alpha);
    const auto width = static_cast<std::size_t>(model.queues);
    RatePoint r{std::vector<double>(width, 0.0)};

    if (model.kind == ChannelKind::explicit_joint) {
        deterministic_vector_sum(
            model.states.size(), width,
            [&](std::uint64_t s, double* acc) {
                const auto& st = model.states[s];
                std::vector<int> col(width);
                for (int k = 0; k < model.servers; ++k) {
                    for (int n = 0; n < model.queues; ++n) col[static_cast<std::size_t>(n)] = st.matrix(n, k);
                    const int winner = column_argmax(alpha, col.data(), model.queues, tie);
                    acc[winner] += st.probability * col[static_cast<std::size_t>(winner)];
                }
            },
            r.rates.data());
        return r;
    }

    const std::uint64_t columns = column_count(model, caps);
    std::vector<double> per_server(width);
    for (int k = 0; k < model.servers; ++k) {
        deterministic_vector_sum(
            columns, width,
            [&](std::uint64_t i, double* acc) {
                int col[64] = {};
                const double p = column_state(model, k, i, col);
                if (p == 0.0) return;
                const int winner = column_argmax(alpha, col, model.queues, tie);
                acc[winner] += p * col[winner];
            },
            per_server.data());
        for (std::size_t n = 0; n < width; ++n) r.rates[n] += per_server[n];
    }
    return r;
}

double brute_force_support(const DiscreteChannelModel& model, std::span<const double> alpha) {
    check_alpha(model, alpha);
    if (state_space_size(model) > kBruteForceCap) throw CapExceeded("brute force: more than 4096 channel states");
    const std::uint64_t allocations =
        checked_pow(static_cast<std::uint64_t>(model.queues), static_cast<unsigned>(model.servers));
    if (allocations > kBruteForceCap) throw CapExceeded("brute force: more than 4096 allocation matrices");

    const auto states = enumerate_states(model, EnumerationCaps{kBruteForceCap, kBruteForceCap});
    double total = 0.0;
    Grid<int> alloc(model.queues, model.servers);
    for (const auto& st : states) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::uint64_t a = 0; a < allocations; ++a) {
            // Allocation matrix: server k serves queue digit_k of `a` in base N.
            std::fill(alloc.cells().begin(), alloc.cells().end(), 0);
            std::uint64_t code = a;
            for (int k = 0; k < model.servers; ++k) {
                alloc(static_cast<int>(code % static_cast<std::uint64_t>(model.queues)), k) = 1;
                code /= static_cast<std::uint64_t>(model.queues);
            }
            double value = 0.0;
            for (int n = 0; n < model.queues; ++n)
                for (int k = 0; k < model.servers; ++k)
                    value += alpha[static_cast<std::size_t>(n)] * st.matrix(n, k) * alloc(n, k);
            best = std::max(best, value);
        }
        total += st.probability * best;
    }
    return total;
}

StabilityRegion build_region(const DiscreteChannelModel& model, const RegionOptions& options) {
    if (options.onoff_fast_path && model.kind == ChannelKind::bernoulli) {
        auto region = onoff_region(model.success_prob);
        region.provenance = fingerprint(model);
        return region;
    }
    StabilityRegion region;
    region.queues = model.queues;
    region.provenance = fingerprint(model);
    if (model.queues == 1) {
        // A single queue has the lone direction (1).
        AlphaVector one{{1}};
        region.inequalities.push_back({one, support_function(model, one, options.caps)});
        return region;
    }
    for (auto& alpha : build_Vhat(model.max_capacity, model.queues, options.caps)) {
        const double beta = support_function(model, alpha, options.caps);
        region.inequalities.push_back({std::move(alpha), beta});
    }
    return region;
}

StabilityRegion onoff_region(const Grid<double>& success_prob) {
    const int queues = success_prob.rows();
    const int servers = success_prob.cols();
    if (queues < 1 || servers < 1) throw ModelError("dimension mismatch: N and K must be positive");
    if (queues > 30) throw CapExceeded("ON-OFF closed form: 2^N - 1 inequalities with N > 30");
    for (double p : success_prob.cells())
        if (!(p >= 0.0 && p <= 1.0)) throw ModelError("ON-OFF success probability outside [0, 1]");

    StabilityRegion region;
    region.queues = queues;
    const std::uint32_t subsets = 1U << queues;
    for (std::uint32_t q = 1; q < subsets; ++q) {
        AlphaVector alpha{std::vector<std::int64_t>(static_cast<std::size_t>(queues), 0)};
        for (int n = 0; n < queues; ++n)
            if ((q >> n) & 1U) alpha.coords[static_cast<std::size_t>(n)] = 1;
        double beta = servers;
        for (int k = 0; k < servers; ++k) {
            double all_off = 1.0;
            for (int n = 0; n < queues; ++n)
                if ((q >> n) & 1U) all_off *= 1.0 - success_prob(n, k);
            beta -= all_off;
        }
        region.inequalities.push_back({std::move(alpha), beta});
    }
    return region;
}

double membership_margin(const StabilityRegion& region, const RatePoint& lambda) {
    if (region.inequalities.empty()) throw ModelError("region has no inequalities");
    if (lambda.size() != static_cast<std::size_t>(region.queues))
        throw ModelError("rate vector length does not match the region dimension");
    for (double l : lambda.rates)
        if (!(l >= 0.0)) throw ModelError("rates must be nonnegative");

    double delta = std::numeric_limits<double>::infinity();
    for (const auto& ineq : region.inequalities) {
        double dot = 0.0;
        double weight = 0.0;
        for (std::size_t n = 0; n < lambda.size(); ++n) {
            dot += static_cast<double>(ineq.alpha.coords[n]) * lambda.rates[n];
            weight += static_cast<double>(ineq.alpha.coords[n]);
        }
        delta = std::min(delta, (ineq.beta - dot) / weight);
    }
    return delta;
}

Verdict classify(double margin, double tolerance) {
    if (margin > tolerance) return Verdict::interior;
    if (margin >= -tolerance) return Verdict::boundary;
    return Verdict::outside;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::interior: return "interior";
        case Verdict::boundary: return "boundary";
        case Verdict::outside: return "outside";
    }
    return "unknown";
}

namespace serial {

double support_function(const DiscreteChannelModel& model, std::span<const double> alpha, const EnumerationCaps& caps) {
    check_alpha(model, alpha);
    double total = 0.0;
    if (model.kind == ChannelKind::explicit_joint) {
        for (const auto& st : model.states) total += st.probability * state_value(alpha, st.matrix);
        return total;
    }
    const std::uint64_t columns = column_count(model, caps);
    for (int k = 0; k < model.servers; ++k)
        for (std::uint64_t i = 0; i < columns; ++i) {
            int col[64] = {};
            const double p = column_state(model, k, i, col);
            if (p != 0.0) total += p * column_max(alpha, col, model.queues);
        }
    return total;
}

}  // namespace serial

}  // namespace mqms
