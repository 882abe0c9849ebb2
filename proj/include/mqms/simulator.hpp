#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mqms/capacity_region.hpp"
#include "mqms/channel_model.hpp"

namespace mqms {

// ---------------------------------------------------------------------------
// Arrivals

/// floor(rate * t) - floor(rate * (t - 1)) packets in slot t.
struct DeterministicArrivals {
    double rate = 0.0;
};

/// `batch` packets with probability `probability`, otherwise none.
struct BatchArrivals {
    double probability = 0.0;
    int batch = 1;
};

/// pmf[a] = Pr(A = a) on {0, ..., pmf.size() - 1}.
struct PmfArrivals {
    std::vector<double> pmf;
};

using QueueArrivals = std::variant<DeterministicArrivals, BatchArrivals, PmfArrivals>;

/// Stationary, independent, bounded arrival processes, one per queue.
class ArrivalModel {
public:
    ArrivalModel() = default;
    explicit ArrivalModel(std::vector<QueueArrivals> queues);

    int queues() const { return static_cast<int>(queues_.size()); }
    const QueueArrivals& queue(int n) const { return queues_[static_cast<std::size_t>(n)]; }

    double mean(int n) const;
    // max over t of E[A_n(t)^2]; the deterministic scheme can emit ceil(rate) in a slot.
    double max_second_moment(int n) const;
    // Largest per-queue value of max_second_moment, the A_max^2 of the occupancy bound.
    double a_max_sq() const;
    RatePoint rates() const;

    // Arrivals of slot t >= 1 into `out`.
    void sample(std::int64_t t, Rng& rng, std::span<std::int64_t> out) const;

private:
    std::vector<QueueArrivals> queues_;
};

// ---------------------------------------------------------------------------
// Allocation and queue dynamics

/// Server-to-queue assignment; every server is assigned to exactly one queue.
struct Allocation {
    std::vector<int> queue_of_server;

    // N x K 0/1 matrix with unit column sums.
    Grid<int> matrix(int queues) const;
};

// Maximum Weight: server k goes to argmax_n X_n * C[n, k]. When every weight
// of a server is zero it goes to queue 0 regardless of the tie rule.
Allocation mw_allocate(std::span<const std::int64_t> queue_lengths, const ChannelMatrix& channel,
                       TieRule tie = TieRule::lowest_index);

// Any-server / longest-connected-queue for ON-OFF channels. Servers are visited
// in `server_order` (default 0..K-1); each takes the longest connected queue,
// lowest index on ties, or queue 0 when nothing is connected.
Allocation as_lcq_allocate(std::span<const std::int64_t> queue_lengths, const ChannelMatrix& channel,
                           std::span<const int> server_order = {});

// Max over all N^K allocations of X . (C o I) 1^T; reference for mw_allocate.
std::int64_t exhaustive_max_weight(std::span<const std::int64_t> queue_lengths, const ChannelMatrix& channel);
std::int64_t allocation_weight(std::span<const std::int64_t> queue_lengths, const ChannelMatrix& channel,
                               const Allocation& allocation);

struct StepResult {
    std::vector<std::int64_t> queue_lengths;
    std::vector<std::int64_t> departures;  // min(X_n, offered service)
};

// X'_n = max(X_n - sum_k C[n,k] I[n,k], 0) + A_n.
StepResult step(std::span<const std::int64_t> queue_lengths, const ChannelMatrix& channel,
                const Allocation& allocation, std::span<const std::int64_t> arrivals);

// In-place variant used by the slot loop; returns nothing and writes departures.
void step_in_place(std::span<std::int64_t> queue_lengths, const ChannelMatrix& channel, const Allocation& allocation,
                   std::span<const std::int64_t> arrivals, std::span<std::int64_t> departures);

// ---------------------------------------------------------------------------
// Simulation

enum class Policy { mw, as_lcq };

struct TraceRow {
    std::int64_t t = 0;
    std::span<const std::int64_t> queue_lengths;
    std::span<const std::int64_t> served;
    std::span<const std::int64_t> arrived;
};

struct SimConfig {
    Policy policy = Policy::mw;
    std::int64_t slots = 100'000;
    std::uint64_t seed = 7;
    int replications = 1;
    TieRule tie = TieRule::lowest_index;
    // Receives every slot of replication 0 when set.
    std::function<void(const TraceRow&)> trace;
};

struct SimStats {
    std::int64_t horizon = 0;
    std::uint64_t seed = 0;
    int replication = 0;
    double avg_aggregate_occupancy = 0.0;  // (1/T) sum_{t=1..T} sum_n X_n(t)
    std::vector<double> per_queue_avg;
    std::vector<double> throughput;  // departures per slot
    std::vector<std::int64_t> final_queue;
    std::vector<std::int64_t> total_arrivals;
    std::vector<std::int64_t> total_departures;

    std::int64_t final_aggregate() const;
};

struct SimReport {
    std::vector<SimStats> replications;
    double mean_avg_occupancy = 0.0;
    double std_error_avg_occupancy = 0.0;
    std::vector<double> mean_throughput;
    std::vector<double> std_error_throughput;
};

// Simulates X(0) = 0 for config.slots slots per replication. Replication r uses
// seed config.seed + r; replications run in parallel and the report is
// independent of thread count.
SimReport run(const DiscreteChannelModel& model, const ArrivalModel& arrivals, const SimConfig& config);

// Occupancy bound (N * A_max^2 + (M K)^2) / (2 delta); throws ModelError for delta <= 0.
double delay_bound(int queues, double a_max_sq, int max_capacity, int servers, double delta);

}  // namespace mqms
