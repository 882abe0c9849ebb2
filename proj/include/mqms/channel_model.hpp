#pragma once

#include <compare>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mqms {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits of one draw. Unlike
// std::uniform_real_distribution the result is fixed across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Row-major queues x servers grid. Row n is queue n, column k is server k.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), cells_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}
    Grid(int rows, int cols, std::vector<T> cells) : rows_(rows), cols_(cols), cells_(std::move(cells)) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return cells_.size(); }

    T& operator()(int n, int k) { return cells_[index(n, k)]; }
    const T& operator()(int n, int k) const { return cells_[index(n, k)]; }

    std::span<const T> cells() const { return cells_; }
    std::span<T> cells() { return cells_; }

    auto operator<=>(const Grid&) const = default;

private:
    std::size_t index(int n, int k) const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(k);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> cells_;
};

/// Link capacities (packets/slot) of one discrete channel state.
using ChannelMatrix = Grid<int>;
/// Link capacities of one fluid-model channel state.
using RealChannelMatrix = Grid<double>;

struct WeightedState {
    ChannelMatrix matrix;
    double probability = 0.0;
};

/// Joint pmf of one server's column (C_{1,k}, ..., C_{N,k}).
struct ColumnState {
    std::vector<int> column;
    double probability = 0.0;
};

enum class ChannelKind { bernoulli, factored, explicit_joint };

std::string to_string(ChannelKind kind);

/**
 * Stationary distribution of the N x K link-capacity matrix with entries in {0, ..., M}.
 *
 * Only the field matching `kind` is populated:
 *  - bernoulli: success_prob(n, k) = Pr(C_{n,k} = 1), M = 1, links independent
 *  - factored: link_pmf(n, k)[c] = Pr(C_{n,k} = c), links independent
 *  - explicit_joint: the listed states with their probabilities
 *
 * Build through the make_* functions, which validate and drop zero-probability
 * explicit states. Instances are immutable afterwards and safe to share.
 */
struct DiscreteChannelModel {
    int queues = 0;
    int servers = 0;
    int max_capacity = 1;
    ChannelKind kind = ChannelKind::bernoulli;
    Grid<double> success_prob;
    Grid<std::vector<double>> link_pmf;
    std::vector<WeightedState> states;

    // Marginal Pr(C_{n,k} = c). Valid for every kind (explicit models are marginalized).
    double link_probability(int n, int k, int c) const;
    // E[C_{n,k}].
    double link_mean(int n, int k) const;
};

struct EnumerationCaps {
    std::uint64_t states = 10'000'000;  // channel states / columns / allocation matrices
    std::uint64_t vhat = 10'000'000;    // candidate direction vectors |W|^N
};

// Throws ModelError naming the first violated invariant.
void validate(const DiscreteChannelModel& model);

DiscreteChannelModel make_bernoulli(Grid<double> success_prob);
DiscreteChannelModel make_factored(int max_capacity, Grid<std::vector<double>> link_pmf);
DiscreteChannelModel make_explicit_joint(int queues, int servers, int max_capacity,
                                         std::vector<WeightedState> states);

// (M+1)^(NK) for product models, |states| for explicit ones (saturating).
std::uint64_t state_space_size(const DiscreteChannelModel& model);

// All channel states with positive probability, in mixed-radix order (link (0,0)
// is the least significant digit) for product models.
std::vector<WeightedState> enumerate_states(const DiscreteChannelModel& model, const EnumerationCaps& caps = {});

// Exact joint pmf of server k's column for bernoulli/factored models, zero-probability
// columns omitted. Throws ModelError for explicit_joint models.
std::vector<ColumnState> per_server_column_distribution(const DiscreteChannelModel& model, int server,
                                                        const EnumerationCaps& caps = {});

// 64-bit FNV-1a hash of the model contents; identifies the model a region was built from.
std::uint64_t fingerprint(const DiscreteChannelModel& model);

/// Precomputed cumulative tables for drawing i.i.d. channel states.
class ChannelSampler {
public:
    explicit ChannelSampler(const DiscreteChannelModel& model);

    void sample(Rng& rng, ChannelMatrix& out) const;
    ChannelMatrix sample(Rng& rng) const;

private:
    const DiscreteChannelModel* model_;
    std::vector<std::vector<double>> link_cdf_;  // per link, product models
    std::vector<double> state_cdf_;              // explicit models
};

ChannelMatrix sample_state(const DiscreteChannelModel& model, Rng& rng);

// ---------------------------------------------------------------------------
// Continuous (fluid) channels

struct ExponentialLink {
    double mean = 1.0;
};

struct UniformLink {
    double upper = 1.0;  // uniform on [0, upper]
};

struct EmpiricalLink {
    std::vector<double> values;  // resampled uniformly
};

using LinkDistribution = std::variant<ExponentialLink, UniformLink, EmpiricalLink>;

double mean(const LinkDistribution& link);
double sample(const LinkDistribution& link, Rng& rng);

/// Independent per-link continuous capacity distributions.
struct ContinuousChannelModel {
    int queues = 0;
    int servers = 0;
    Grid<LinkDistribution> links;
};

void validate(const ContinuousChannelModel& model);
ContinuousChannelModel make_continuous(Grid<LinkDistribution> links);

RealChannelMatrix sample_state(const ContinuousChannelModel& model, Rng& rng);

}  // namespace mqms
