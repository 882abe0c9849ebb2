#include "mqms/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mqms/error.hpp"
#include "mqms/parallel.hpp"

namespace mqms {

namespace {

void validate_queue(const QueueArrivals& q, std::size_t n) {
    const std::string where = " (queue " + std::to_string(n) + ")";
    if (const auto* d = std::get_if<DeterministicArrivals>(&q)) {
        if (!(d->rate >= 0.0) || !std::isfinite(d->rate)) throw ModelError("deterministic rate must be finite and >= 0" + where);
    } else if (const auto* b = std::get_if<BatchArrivals>(&q)) {
        if (!(b->probability >= 0.0 && b->probability <= 1.0)) throw ModelError("batch probability outside [0, 1]" + where);
        if (b->batch < 0) throw ModelError("batch size must be >= 0" + where);
    } else {
        const auto& pmf = std::get<PmfArrivals>(q).pmf;
        if (pmf.empty()) throw ModelError("arrival pmf is empty" + where);
        double sum = 0.0;
        for (double p : pmf) {
            if (!(p >= 0.0)) throw ModelError("negative probability in arrival pmf" + where);
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw ModelError("arrival pmf not normalized" + where);
    }
}

double mean_of(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_error_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

SimStats simulate_one(const DiscreteChannelModel& model, const ArrivalModel& arrivals, const SimConfig& config,
                      int replication) {
    const auto n_queues = static_cast<std::size_t>(model.queues);
    SimStats s;
    s.horizon = config.slots;
    s.seed = config.seed + static_cast<std::uint64_t>(replication);
    s.replication = replication;
    s.per_queue_avg.assign(n_queues, 0.0);
    s.total_arrivals.assign(n_queues, 0);
    s.total_departures.assign(n_queues, 0);

    Rng rng(s.seed);
    const ChannelSampler sampler(model);
    ChannelMatrix channel(model.queues, model.servers);
    std::vector<std::int64_t> x(n_queues, 0);
    std::vector<std::int64_t> a(n_queues, 0);
    std::vector<std::int64_t> served(n_queues, 0);
    std::vector<double> occupancy_sum(n_queues, 0.0);
    const bool tracing = config.trace && replication == 0;

    for (std::int64_t t = 1; t <= config.slots; ++t) {
        sampler.sample(rng, channel);
        arrivals.sample(t, rng, a);
        const Allocation alloc = config.policy == Policy::mw ? mw_allocate(x, channel, config.tie)
                                                             : as_lcq_allocate(x, channel);
        step_in_place(x, channel, alloc, a, served);
        for (std::size_t n = 0; n < n_queues; ++n) {
            s.total_arrivals[n] += a[n];
            s.total_departures[n] += served[n];
            occupancy_sum[n] += static_cast<double>(x[n]);
        }
        if (tracing) config.trace(TraceRow{t, x, served, a});
    }

    const auto horizon = static_cast<double>(config.slots);
    s.throughput.resize(n_queues);
    for (std::size_t n = 0; n < n_queues; ++n) {
        s.per_queue_avg[n] = occupancy_sum[n] / horizon;
        s.avg_aggregate_occupancy += occupancy_sum[n];
        s.throughput[n] = static_cast<double>(s.total_departures[n]) / horizon;
    }
    s.avg_aggregate_occupancy /= horizon;
    s.final_queue = x;
    return s;
}

}  // namespace

ArrivalModel::ArrivalModel(std::vector<QueueArrivals> queues) : queues_(std::move(queues)) {
    for (std::size_t n = 0; n < queues_.size(); ++n) validate_queue(queues_[n], n);
}

double ArrivalModel::mean(int n) const {
    const auto& q = queue(n);
    if (const auto* d = std::get_if<DeterministicArrivals>(&q)) return d->rate;
    if (const auto* b = std::get_if<BatchArrivals>(&q)) return b->probability * b->batch;
    const auto& pmf = std::get<PmfArrivals>(q).pmf;
    double m = 0.0;
    for (std::size_t v = 0; v < pmf.size(); ++v) m += static_cast<double>(v) * pmf[v];
    return m;
}

double ArrivalModel::max_second_moment(int n) const {
    const auto& q = queue(n);
    if (const auto* d = std::get_if<DeterministicArrivals>(&q)) {
        const double c = std::ceil(d->rate);
        return c * c;
    }
    if (const auto* b = std::get_if<BatchArrivals>(&q)) return b->probability * b->batch * b->batch;
    const auto& pmf = std::get<PmfArrivals>(q).pmf;
    double m = 0.0;
    for (std::size_t v = 0; v < pmf.size(); ++v) m += static_cast<double>(v * v) * pmf[v];
    return m;
}

double ArrivalModel::a_max_sq() const {
    double best = 0.0;
    for (int n = 0; n < queues(); ++n) best = std::max(best, max_second_moment(n));
    return best;
}

RatePoint ArrivalModel::rates() const {
    RatePoint r;
    for (int n = 0; n < queues(); ++n) r.rates.push_back(mean(n));
    return r;
}

void ArrivalModel::sample(std::int64_t t, Rng& rng, std::span<std::int64_t> out) const {
    for (std::size_t n = 0; n < queues_.size(); ++n) {
        const auto& q = queues_[n];
        if (const auto* d = std::get_if<DeterministicArrivals>(&q)) {
            out[n] = static_cast<std::int64_t>(std::floor(d->rate * static_cast<double>(t)) -
                                               std::floor(d->rate * static_cast<double>(t - 1)));
        } else if (const auto* b = std::get_if<BatchArrivals>(&q)) {
            out[n] = uniform01(rng) < b->probability ? b->batch : 0;
        } else {
            const auto& pmf = std::get<PmfArrivals>(q).pmf;
            const double u = uniform01(rng);
            double acc = 0.0;
            std::size_t v = 0;
            for (; v + 1 < pmf.size(); ++v) {
                acc += pmf[v];
                if (u < acc) break;
            }
            out[n] = static_cast<std::int64_t>(v);
        }
    }
}

Grid<int> Allocation::matrix(int queues) const {
    Grid<int> m(queues, static_cast<int>(queue_of_server.size()), 0);
    for (std::size_t k = 0; k < queue_of_server.size(); ++k) m(queue_of_server[k], static_cast<int>(k)) = 1;
    return m;
}

Allocation mw_allocate(std::span<const std::int64_t> queue_lengths, const ChannelMatrix& channel, TieRule tie) {
    const int queues = channel.rows();
    Allocation alloc;
    alloc.queue_of_server.resize(static_cast<std::size_t>(channel.cols()));
    for (int k = 0; k < channel.cols(); ++k) {
        int best = 0;
        std::int64_t best_w = queue_lengths[0] * channel(0, k);
        for (int n = 1; n < queues; ++n) {
            const std::int64_t w = queue_lengths[static_cast<std::size_t>(n)] * channel(n, k);
            if (w > best_w || (tie == TieRule::highest_index && w == best_w && w > 0)) {
                best = n;
                best_w = w;
            }
        }
        alloc.queue_of_server[static_cast<std::size_t>(k)] = best;
    }
    return alloc;
}

Allocation as_lcq_allocate(std::span<const std::int64_t> queue_lengths, const ChannelMatrix& channel,
                           std::span<const int> server_order) {
    for (int c : channel.cells())
        if (c != 0 && c != 1) throw ModelError("AS/LCQ requires ON-OFF (0/1) channels");
    const int servers = channel.cols();
    std::vector<int> order(server_order.begin(), server_order.end());
    if (order.empty()) {
        order.resize(static_cast<std::size_t>(servers));
        std::iota(order.begin(), order.end(), 0);
    }
    if (order.size() != static_cast<std::size_t>(servers)) throw ModelError("server order must list every server");

    Allocation alloc;
    alloc.queue_of_server.assign(static_cast<std::size_t>(servers), 0);
    for (int k : order) {
        int best = -1;
        for (int n = 0; n < channel.rows(); ++n) {
            if (channel(n, k) == 0) continue;
            if (best < 0 || queue_lengths[static_cast<std::size_t>(n)] > queue_lengths[static_cast<std::size_t>(best)])
                best = n;
        }
        alloc.queue_of_server[static_cast<std::size_t>(k)] = best < 0 ? 0 : best;
    }
    return alloc;
}

std::int64_t allocation_weight(std::span<const std::int64_t> queue_lengths, const ChannelMatrix& channel,
                               const Allocation& allocation) {
    std::int64_t w = 0;
    for (std::size_t k = 0; k < allocation.queue_of_server.size(); ++k) {
        const int n = allocation.queue_of_server[k];
        w += queue_lengths[static_cast<std::size_t>(n)] * channel(n, static_cast<int>(k));
    }
    return w;
}

std::int64_t exhaustive_max_weight(std::span<const std::int64_t> queue_lengths, const ChannelMatrix& channel) {
    const auto queues = static_cast<std::uint64_t>(channel.rows());
    const auto servers = static_cast<unsigned>(channel.cols());
    const std::uint64_t total = checked_pow(queues, servers);
    if (total > 1'000'000) throw CapExceeded("exhaustive allocation search: more than 10^6 allocations");

    std::int64_t best = 0;
    Allocation alloc;
    alloc.queue_of_server.resize(servers);
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        for (unsigned k = 0; k < servers; ++k) {
            alloc.queue_of_server[k] = static_cast<int>(c % queues);
            c /= queues;
        }
        best = std::max(best, allocation_weight(queue_lengths, channel, alloc));
    }
    return best;
}

void step_in_place(std::span<std::int64_t> queue_lengths, const ChannelMatrix& channel, const Allocation& allocation,
                   std::span<const std::int64_t> arrivals, std::span<std::int64_t> departures) {
    std::fill(departures.begin(), departures.end(), 0);
    // departures temporarily holds the offered service sum_k C[n,k] I[n,k]
    for (std::size_t k = 0; k < allocation.queue_of_server.size(); ++k) {
        const int n = allocation.queue_of_server[k];
        departures[static_cast<std::size_t>(n)] += channel(n, static_cast<int>(k));
    }
    for (std::size_t n = 0; n < queue_lengths.size(); ++n) {
        departures[n] = std::min(queue_lengths[n], departures[n]);
        queue_lengths[n] = queue_lengths[n] - departures[n] + arrivals[n];
    }
}

StepResult step(std::span<const std::int64_t> queue_lengths, const ChannelMatrix& channel,
                const Allocation& allocation, std::span<const std::int64_t> arrivals) {
    StepResult r{{queue_lengths.begin(), queue_lengths.end()}, std::vector<std::int64_t>(queue_lengths.size())};
    step_in_place(r.queue_lengths, channel, allocation, arrivals, r.departures);
    return r;
}

std::int64_t SimStats::final_aggregate() const {
    return std::accumulate(final_queue.begin(), final_queue.end(), std::int64_t{0});
}

SimReport run(const DiscreteChannelModel& model, const ArrivalModel& arrivals, const SimConfig& config) {
    if (config.slots < 1) throw ModelError("simulation needs at least one slot");
    if (config.replications < 1) throw ModelError("simulation needs at least one replication");
    if (arrivals.queues() != model.queues) throw ModelError("arrival model and channel model disagree on N");
    if (config.policy == Policy::as_lcq && model.max_capacity > 1)
        throw ModelError("AS/LCQ requires ON-OFF channels (M = 1)");

    SimReport report;
    report.replications.resize(static_cast<std::size_t>(config.replications));

#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
    for (int r = 0; r < config.replications; ++r)
        report.replications[static_cast<std::size_t>(r)] = simulate_one(model, arrivals, config, r);

    std::vector<double> occ;
    for (const auto& s : report.replications) occ.push_back(s.avg_aggregate_occupancy);
    report.mean_avg_occupancy = mean_of(occ);
    report.std_error_avg_occupancy = std_error_of(occ);
    for (int n = 0; n < model.queues; ++n) {
        std::vector<double> thr;
        for (const auto& s : report.replications) thr.push_back(s.throughput[static_cast<std::size_t>(n)]);
        report.mean_throughput.push_back(mean_of(thr));
        report.std_error_throughput.push_back(std_error_of(thr));
    }
    return report;
}

double delay_bound(int queues, double a_max_sq, int max_capacity, int servers, double delta) {
    if (!(delta > 0.0)) throw ModelError("rate not strictly interior; bound undefined");
    const double mk = static_cast<double>(max_capacity) * servers;
    return (queues * a_max_sq + mk * mk) / (2.0 * delta);
}

}  // namespace mqms
