#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mqms/alpha_sets.hpp"
#include "mqms/capacity_region.hpp"
#include "mqms/fluid_region.hpp"
#include "mqms/parallel.hpp"
#include "mqms/simulator.hpp"
#include "test_support.hpp"

namespace {

// Restores the thread count on scope exit.
struct ThreadScope {
    explicit ThreadScope(int threads) : saved(mqms::thread_count()) { mqms::set_thread_count(threads); }
    ~ThreadScope() { mqms::set_thread_count(saved); }
    int saved;
};

template <typename F>
auto with_threads(int threads, F&& f) {
    ThreadScope scope(threads);
    return f();
}

}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("checked_pow is exact below the limit and saturates above it") {
    CHECK(mqms::checked_pow(3, 4) == 81);
    CHECK(mqms::checked_pow(7, 0) == 1);
    CHECK(mqms::checked_pow(2, 63) == (std::uint64_t{1} << 63));
    CHECK(mqms::checked_pow(2, 64) == std::numeric_limits<std::uint64_t>::max());
    CHECK(mqms::checked_pow(1000, 10) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("deterministic_sum is bitwise identical for every thread count") {
    auto term = [](std::uint64_t i) { return std::sin(static_cast<double>(i)) * 1e-3 + 1.0 / (1.0 + i); };
    const double one = with_threads(1, [&] { return mqms::deterministic_sum(1'000'003, term); });
    for (int t : {2, 3, 4, 7}) CHECK(with_threads(t, [&] { return mqms::deterministic_sum(1'000'003, term); }) == one);
    CHECK(mqms::deterministic_sum(0, term) == 0.0);
    CHECK(mqms::deterministic_sum(5, [](std::uint64_t i) { return double(i); }) == 10.0);
}

TEST_CASE("deterministic_vector_sum matches a plain loop and is thread independent") {
    auto acc = [](std::uint64_t i, double* out) {
        out[0] += 1.0;
        out[1] += static_cast<double>(i % 7);
    };
    std::vector<double> one(2), four(2);
    with_threads(1, [&] { mqms::deterministic_vector_sum(50'000, 2, acc, one.data()); return 0; });
    with_threads(4, [&] { mqms::deterministic_vector_sum(50'000, 2, acc, four.data()); return 0; });
    CHECK(one == four);
    CHECK(one[0] == 50'000.0);
    double expected = 0.0;
    for (int i = 0; i < 50'000; ++i) expected += i % 7;
    CHECK(one[1] == expected);
}

TEST_CASE("parallel build_Vhat equals the serial reference") {
    for (auto [n, m] : {std::pair{2, 4}, {3, 2}, {3, 3}, {4, 2}}) {
        const auto serial = mqms::serial::build_Vhat(m, n);
        CHECK(with_threads(1, [&] { return mqms::build_Vhat(m, n); }) == serial);
        CHECK(with_threads(4, [&] { return mqms::build_Vhat(m, n); }) == serial);
    }
}

TEST_CASE("parallel support_function equals the serial reference bitwise") {
    mqms::Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const auto model = testing::random_discrete(rng, testing::uniform_int(rng, 2, 4),
                                                    testing::uniform_int(rng, 1, 3), testing::uniform_int(rng, 1, 3));
        std::vector<double> alpha(static_cast<std::size_t>(model.queues));
        for (auto& a : alpha) a = testing::uniform_int(rng, 0, 5);
        alpha[0] += 1.0;
        const double ref = mqms::serial::support_function(model, alpha);
        CHECK(with_threads(1, [&] { return mqms::support_function(model, alpha); }) == doctest::Approx(ref).epsilon(1e-14));
        const double t1 = with_threads(1, [&] { return mqms::support_function(model, alpha); });
        const double t4 = with_threads(4, [&] { return mqms::support_function(model, alpha); });
        CHECK(t1 == t4);
    }
}

TEST_CASE("parallel mc_support_function equals the serial reference") {
    const auto model = mqms::make_continuous(mqms::Grid<mqms::LinkDistribution>(
        2, 2, {mqms::ExponentialLink{2.0}, mqms::UniformLink{1.0}, mqms::ExponentialLink{1.0}, mqms::EmpiricalLink{{0.0, 0.5, 3.0}}}));
    const mqms::ChannelSampleBlock block(model, 20'000, 5);
    const std::vector<double> alpha{0.3, 0.9};
    const auto ref = mqms::serial::mc_support_function(block, alpha);
    for (int t : {1, 4}) {
        const auto par = with_threads(t, [&] { return mqms::mc_support_function(block, alpha); });
        CHECK(par.estimate == doctest::Approx(ref.estimate).epsilon(1e-12));
        CHECK(par.std_error == doctest::Approx(ref.std_error).epsilon(1e-9));
    }
    const auto a = with_threads(1, [&] { return mqms::mc_support_function(block, alpha); });
    const auto b = with_threads(4, [&] { return mqms::mc_support_function(block, alpha); });
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("simulation replications are identical for 1 and 4 threads") {
    const auto model = mqms::make_bernoulli(mqms::Grid<double>(2, 2, 0.5));
    const mqms::ArrivalModel arrivals({mqms::BatchArrivals{0.6, 1}, mqms::BatchArrivals{0.6, 1}});
    mqms::SimConfig cfg;
    cfg.slots = 5'000;
    cfg.replications = 6;
    const auto one = with_threads(1, [&] { return mqms::run(model, arrivals, cfg); });
    const auto four = with_threads(4, [&] { return mqms::run(model, arrivals, cfg); });
    REQUIRE(one.replications.size() == four.replications.size());
    for (std::size_t r = 0; r < one.replications.size(); ++r) {
        CHECK(one.replications[r].avg_aggregate_occupancy == four.replications[r].avg_aggregate_occupancy);
        CHECK(one.replications[r].final_queue == four.replications[r].final_queue);
        CHECK(one.replications[r].total_departures == four.replications[r].total_departures);
    }
    CHECK(one.mean_avg_occupancy == four.mean_avg_occupancy);
}

TEST_CASE("boundary trace is identical for 1 and 4 threads") {
    const auto model = mqms::make_continuous(
        mqms::Grid<mqms::LinkDistribution>(2, 1, {mqms::ExponentialLink{2.0}, mqms::ExponentialLink{1.0}}));
    mqms::TraceOptions opts;
    opts.directions = 41;
    opts.samples = 4'000;
    opts.grid_points = 21;
    const auto a = with_threads(1, [&] { return mqms::boundary_trace(model, opts); });
    const auto b = with_threads(4, [&] { return mqms::boundary_trace(model, opts); });
    REQUIRE(a.points().size() == b.points().size());
    for (std::size_t i = 0; i < a.points().size(); ++i) {
        CHECK(a.points()[i].lambda1 == b.points()[i].lambda1);
        CHECK(a.points()[i].lambda2 == b.points()[i].lambda2);
    }
}

}  // TEST_SUITE
