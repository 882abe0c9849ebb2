#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mqms/alpha_sets.hpp"
#include "mqms/channel_model.hpp"

namespace mqms {

/// Nonnegative per-queue rate vector (packets/slot): arrival rates or admitted rates.
struct RatePoint {
    std::vector<double> rates;

    std::size_t size() const { return rates.size(); }
    double operator[](std::size_t n) const { return rates[n]; }
};

/// One half-space alpha . lambda <= beta of the stability polytope.
struct Inequality {
    AlphaVector alpha;
    double beta = 0.0;
};

struct StabilityRegion {
    int queues = 0;
    std::vector<Inequality> inequalities;
    std::uint64_t provenance = 0;  // fingerprint of the source model, 0 if hand-built
};

enum class TieRule { lowest_index, highest_index };

/**
 * Support function h(alpha) = sum_s pi_s max_I alpha (C_s o I) 1^T.
 *
 * The max over allocation matrices separates per server, so for product
 * models this is sum_k E[max_n alpha_n C_{n,k}], computed exactly over the
 * (M+1)^N column states of each server. Explicit models sum over their states.
 */
double support_function(const DiscreteChannelModel& model, std::span<const double> alpha,
                        const EnumerationCaps& caps = {});
double support_function(const DiscreteChannelModel& model, const AlphaVector& alpha, const EnumerationCaps& caps = {});

// Expected per-queue service under the alpha-maximizing allocation in every state.
// alpha . result equals support_function(model, alpha).
RatePoint support_vertex(const DiscreteChannelModel& model, std::span<const double> alpha,
                         TieRule tie = TieRule::lowest_index, const EnumerationCaps& caps = {});

// Literal evaluation over every channel state and all N^K allocation matrices.
// Independent of support_function; limited to 4096 states and 4096 allocations.
double brute_force_support(const DiscreteChannelModel& model, std::span<const double> alpha);

struct RegionOptions {
    EnumerationCaps caps;
    bool onoff_fast_path = false;  // bernoulli models: emit the 2^N - 1 subset inequalities
};

// One inequality per direction of build_Vhat(M, N), in V-hat order.
StabilityRegion build_region(const DiscreteChannelModel& model, const RegionOptions& options = {});

// Closed form for independent ON-OFF links: for each nonempty subset Q,
// sum_{n in Q} lambda_n <= K - sum_k prod_{n in Q} (1 - p_{n,k}).
// Inequality i (1-based) encodes Q by the bits of i.
StabilityRegion onoff_region(const Grid<double>& success_prob);

// delta = min over inequalities of (beta - alpha . lambda) / (alpha . 1).
double membership_margin(const StabilityRegion& region, const RatePoint& lambda);

enum class Verdict { interior, boundary, outside };

Verdict classify(double margin, double tolerance = 1e-9);
const char* to_string(Verdict v);

namespace serial {

// Single-threaded reference for the support-function kernel.
double support_function(const DiscreteChannelModel& model, std::span<const double> alpha,
                        const EnumerationCaps& caps = {});

}  // namespace serial

}  // namespace mqms
