#include "mqms/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

#include "mqms/error.hpp"
#include "mqms/parallel.hpp"

namespace mqms {

namespace {

constexpr double kNormTol = 1e-12;

[[noreturn]] void fail(const std::string& what) { throw ModelError(what); }

std::string link_name(int n, int k) {
    std::ostringstream os;
    os << "link (" << n << ", " << k << ")";
    return os.str();
}

void check_dims(int queues, int servers) {
    if (queues < 1 || servers < 1) fail("dimension mismatch: N and K must be positive");
}

void check_cap(std::uint64_t size, std::uint64_t cap, const char* what) {
    if (size > cap) {
        std::ostringstream os;
        os << what << " size " << size << " exceeds cap " << cap;
        throw CapExceeded(os.str());
    }
}

// Decodes mixed-radix `index` with base (M+1) into `digits`.
void decode(std::uint64_t index, int base, std::span<int> digits) {
    for (auto& d : digits) {
        d = static_cast<int>(index % static_cast<std::uint64_t>(base));
        index /= static_cast<std::uint64_t>(base);
    }
}

struct Fnv {
    std::uint64_t h = 1469598103934665603ULL;
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    }
    void i32(int v) { bytes(&v, sizeof v); }
    void f64(double v) { bytes(&v, sizeof v); }
};

}  // namespace

std::string to_string(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::bernoulli: return "bernoulli";
        case ChannelKind::factored: return "factored";
        case ChannelKind::explicit_joint: return "explicit_joint";
    }
    return "unknown";
}

double DiscreteChannelModel::link_probability(int n, int k, int c) const {
    switch (kind) {
        case ChannelKind::bernoulli: {
            const double p = success_prob(n, k);
            return c == 1 ? p : (c == 0 ? 1.0 - p : 0.0);
        }
        case ChannelKind::factored: {
            const auto& pmf = link_pmf(n, k);
            return c >= 0 && c < static_cast<int>(pmf.size()) ? pmf[static_cast<std::size_t>(c)] : 0.0;
        }
        case ChannelKind::explicit_joint: {
            double p = 0.0;
            for (const auto& s : states)
                if (s.matrix(n, k) == c) p += s.probability;
            return p;
        }
    }
    return 0.0;
}

double DiscreteChannelModel::link_mean(int n, int k) const {
    double m = 0.0;
    for (int c = 1; c <= max_capacity; ++c) m += c * link_probability(n, k, c);
    return m;
}

void validate(const DiscreteChannelModel& model) {
    check_dims(model.queues, model.servers);
    if (model.max_capacity < 1) fail("dimension mismatch: M must be at least 1");

    switch (model.kind) {
        case ChannelKind::bernoulli: {
            if (model.max_capacity != 1) fail("bernoulli model requires M = 1");
            if (model.success_prob.rows() != model.queues || model.success_prob.cols() != model.servers)
                fail("dimension mismatch: success probabilities must be N x K");
            for (int n = 0; n < model.queues; ++n)
                for (int k = 0; k < model.servers; ++k) {
                    const double p = model.success_prob(n, k);
                    if (!(p >= 0.0)) fail("negative probability at " + link_name(n, k));
                    if (!(p <= 1.0)) fail("probability above 1 at " + link_name(n, k));
                }
            break;
        }
        case ChannelKind::factored: {
            if (model.link_pmf.rows() != model.queues || model.link_pmf.cols() != model.servers)
                fail("dimension mismatch: link pmfs must be N x K");
            for (int n = 0; n < model.queues; ++n)
                for (int k = 0; k < model.servers; ++k) {
                    const auto& pmf = model.link_pmf(n, k);
                    if (pmf.size() != static_cast<std::size_t>(model.max_capacity) + 1)
                        fail("dimension mismatch: pmf of " + link_name(n, k) + " must have M+1 entries");
                    double sum = 0.0;
                    for (double p : pmf) {
                        if (!(p >= 0.0)) fail("negative probability at " + link_name(n, k));
                        sum += p;
                    }
                    if (std::abs(sum - 1.0) > kNormTol) fail("pmf of " + link_name(n, k) + " not normalized");
                }
            break;
        }
        case ChannelKind::explicit_joint: {
            if (model.states.empty()) fail("explicit_joint model has no states");
            double sum = 0.0;
            std::set<std::vector<int>> seen;
            for (std::size_t s = 0; s < model.states.size(); ++s) {
                const auto& st = model.states[s];
                if (st.matrix.rows() != model.queues || st.matrix.cols() != model.servers)
                    fail("dimension mismatch: state " + std::to_string(s) + " is not N x K");
                for (int c : st.matrix.cells())
                    if (c < 0 || c > model.max_capacity)
                        fail("state " + std::to_string(s) + " has a capacity outside {0..M}");
                if (!(st.probability >= 0.0)) fail("negative probability in state " + std::to_string(s));
                sum += st.probability;
                const auto cells = st.matrix.cells();
                if (!seen.emplace(cells.begin(), cells.end()).second)
                    fail("duplicate channel matrix in state " + std::to_string(s));
            }
            if (std::abs(sum - 1.0) > kNormTol) fail("state probabilities not normalized");
            break;
        }
    }
}

DiscreteChannelModel make_bernoulli(Grid<double> success_prob) {
    DiscreteChannelModel m;
    m.queues = success_prob.rows();
    m.servers = success_prob.cols();
    m.max_capacity = 1;
    m.kind = ChannelKind::bernoulli;
    m.success_prob = std::move(success_prob);
    validate(m);
    return m;
}

DiscreteChannelModel make_factored(int max_capacity, Grid<std::vector<double>> link_pmf) {
    DiscreteChannelModel m;
    m.queues = link_pmf.rows();
    m.servers = link_pmf.cols();
    m.max_capacity = max_capacity;
    m.kind = ChannelKind::factored;
    m.link_pmf = std::move(link_pmf);
    validate(m);
    return m;
}

DiscreteChannelModel make_explicit_joint(int queues, int servers, int max_capacity,
                                         std::vector<WeightedState> states) {
    DiscreteChannelModel m;
    m.queues = queues;
    m.servers = servers;
    m.max_capacity = max_capacity;
    m.kind = ChannelKind::explicit_joint;
    m.states = std::move(states);
    validate(m);
    std::erase_if(m.states, [](const WeightedState& s) { return s.probability == 0.0; });
    return m;
}

std::uint64_t state_space_size(const DiscreteChannelModel& model) {
    if (model.kind == ChannelKind::explicit_joint) return model.states.size();
    return checked_pow(static_cast<std::uint64_t>(model.max_capacity) + 1,
                       static_cast<unsigned>(model.queues * model.servers));
}

std::vector<WeightedState> enumerate_states(const DiscreteChannelModel& model, const EnumerationCaps& caps) {
    if (model.kind == ChannelKind::explicit_joint) return model.states;

    const std::uint64_t total = state_space_size(model);
    check_cap(total, caps.states, "channel state space");

    const int links = model.queues * model.servers;
    const int base = model.max_capacity + 1;
    std::vector<int> digits(static_cast<std::size_t>(links));
    std::vector<WeightedState> out;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        decode(idx, base, digits);
        double p = 1.0;
        for (int l = 0; l < links && p > 0.0; ++l)
            p *= model.link_probability(l / model.servers, l % model.servers, digits[static_cast<std::size_t>(l)]);
        if (p == 0.0) continue;
        out.push_back({ChannelMatrix(model.queues, model.servers, digits), p});
    }
    return out;
}

std::vector<ColumnState> per_server_column_distribution(const DiscreteChannelModel& model, int server,
                                                        const EnumerationCaps& caps) {
    if (model.kind == ChannelKind::explicit_joint)
        fail("per-server column distribution needs independent links; use enumerate_states for explicit_joint");
    if (server < 0 || server >= model.servers) fail("server index out of range");

    const int base = model.max_capacity + 1;
    const std::uint64_t total = checked_pow(static_cast<std::uint64_t>(base), static_cast<unsigned>(model.queues));
    check_cap(total, caps.states, "column state space");

    std::vector<int> digits(static_cast<std::size_t>(model.queues));
    std::vector<ColumnState> out;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        decode(idx, base, digits);
        double p = 1.0;
        for (int n = 0; n < model.queues && p > 0.0; ++n)
            p *= model.link_probability(n, server, digits[static_cast<std::size_t>(n)]);
        if (p == 0.0) continue;
        out.push_back({digits, p});
    }
    return out;
}

std::uint64_t fingerprint(const DiscreteChannelModel& model) {
    Fnv f;
    f.i32(model.queues);
    f.i32(model.servers);
    f.i32(model.max_capacity);
    f.i32(static_cast<int>(model.kind));
    switch (model.kind) {
        case ChannelKind::bernoulli:
            for (double p : model.success_prob.cells()) f.f64(p);
            break;
        case ChannelKind::factored:
            for (const auto& pmf : model.link_pmf.cells())
                for (double p : pmf) f.f64(p);
            break;
        case ChannelKind::explicit_joint:
            for (const auto& s : model.states) {
                for (int c : s.matrix.cells()) f.i32(c);
                f.f64(s.probability);
            }
            break;
    }
    return f.h;
}

ChannelSampler::ChannelSampler(const DiscreteChannelModel& model) : model_(&model) {
    if (model.kind == ChannelKind::explicit_joint) {
        double acc = 0.0;
        for (const auto& s : model.states) {
            acc += s.probability;
            state_cdf_.push_back(acc);
        }
        return;
    }
    for (int n = 0; n < model.queues; ++n)
        for (int k = 0; k < model.servers; ++k) {
            std::vector<double> cdf;
            double acc = 0.0;
            for (int c = 0; c <= model.max_capacity; ++c) {
                acc += model.link_probability(n, k, c);
                cdf.push_back(acc);
            }
            link_cdf_.push_back(std::move(cdf));
        }
}

namespace {

// First index whose cumulative value exceeds u; the last index absorbs rounding.
std::size_t invert_cdf(const std::vector<double>& cdf, double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace

void ChannelSampler::sample(Rng& rng, ChannelMatrix& out) const {
    const auto& m = *model_;
    if (m.kind == ChannelKind::explicit_joint) {
        out = m.states[invert_cdf(state_cdf_, uniform01(rng) * state_cdf_.back())].matrix;
        return;
    }
    if (out.rows() != m.queues || out.cols() != m.servers) out = ChannelMatrix(m.queues, m.servers);
    auto cells = out.cells();
    if (m.kind == ChannelKind::bernoulli) {
        const auto p = m.success_prob.cells();
        for (std::size_t l = 0; l < cells.size(); ++l) cells[l] = uniform01(rng) < p[l] ? 1 : 0;
        return;
    }
    for (std::size_t l = 0; l < cells.size(); ++l)
        cells[l] = static_cast<int>(invert_cdf(link_cdf_[l], uniform01(rng)));
}

ChannelMatrix ChannelSampler::sample(Rng& rng) const {
    ChannelMatrix out(model_->queues, model_->servers);
    sample(rng, out);
    return out;
}

ChannelMatrix sample_state(const DiscreteChannelModel& model, Rng& rng) { return ChannelSampler(model).sample(rng); }

double mean(const LinkDistribution& link) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ExponentialLink>) {
                return d.mean;
            } else if constexpr (std::is_same_v<T, UniformLink>) {
                return 0.5 * d.upper;
            } else {
                double s = 0.0;
                for (double v : d.values) s += v;
                return s / static_cast<double>(d.values.size());
            }
        },
        link);
}

double sample(const LinkDistribution& link, Rng& rng) {
    return std::visit(
        [&rng](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ExponentialLink>) {
                return -d.mean * std::log1p(-uniform01(rng));
            } else if constexpr (std::is_same_v<T, UniformLink>) {
                return d.upper * uniform01(rng);
            } else {
                const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(d.values.size()));
                return d.values[std::min(i, d.values.size() - 1)];
            }
        },
        link);
}

void validate(const ContinuousChannelModel& model) {
    check_dims(model.queues, model.servers);
    if (model.links.rows() != model.queues || model.links.cols() != model.servers)
        fail("dimension mismatch: link distributions must be N x K");
    for (int n = 0; n < model.queues; ++n)
        for (int k = 0; k < model.servers; ++k) {
            const auto& link = model.links(n, k);
            if (const auto* e = std::get_if<ExponentialLink>(&link); e && !(e->mean > 0.0))
                fail("exponential mean must be positive at " + link_name(n, k));
            if (const auto* u = std::get_if<UniformLink>(&link); u && !(u->upper > 0.0))
                fail("uniform upper bound must be positive at " + link_name(n, k));
            if (const auto* emp = std::get_if<EmpiricalLink>(&link)) {
                if (emp->values.empty()) fail("empirical table is empty at " + link_name(n, k));
                for (double v : emp->values)
                    if (!(v >= 0.0) || !std::isfinite(v)) fail("empirical table has a negative value at " + link_name(n, k));
            }
        }
}

ContinuousChannelModel make_continuous(Grid<LinkDistribution> links) {
    ContinuousChannelModel m{links.rows(), links.cols(), std::move(links)};
    validate(m);
    return m;
}

RealChannelMatrix sample_state(const ContinuousChannelModel& model, Rng& rng) {
    RealChannelMatrix out(model.queues, model.servers);
    for (int n = 0; n < model.queues; ++n)
        for (int k = 0; k < model.servers; ++k) out(n, k) = sample(model.links(n, k), rng);
    return out;
}

}  // namespace mqms
