#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "mqms/channel_model.hpp"
#include "mqms/error.hpp"
#include "mqms/parallel.hpp"
#include "test_support.hpp"

using mqms::ChannelMatrix;
using mqms::Grid;

namespace {

std::string error_of(auto&& f) {
    try {
        f();
    } catch (const mqms::ModelError& e) {
        return e.what();
    }
    return {};
}

ChannelMatrix column(std::vector<int> v) {
    const int rows = static_cast<int>(v.size());
    return ChannelMatrix(rows, 1, std::move(v));
}

}  // namespace

TEST_SUITE("channel_models") {

TEST_CASE("validate accepts well-formed models and names the first violation") {
    CHECK_NOTHROW(mqms::make_bernoulli(Grid<double>(2, 1, {0.5, 0.5})));

    const auto joint = error_of([] {
        mqms::make_explicit_joint(1, 1, 1, {{column({0}), 0.6}, {column({1}), 0.5}});
    });
    CHECK(joint.find("not normalized") != std::string::npos);

    const auto factored = error_of([] {
        mqms::make_factored(2, Grid<std::vector<double>>(1, 1, std::vector<double>{0.5, 0.5, 0.2}));
    });
    CHECK(factored.find("not normalized") != std::string::npos);

    CHECK(error_of([] { mqms::make_bernoulli(Grid<double>(1, 1, -0.1)); }).find("negative probability") !=
          std::string::npos);
    CHECK(error_of([] { mqms::make_factored(2, Grid<std::vector<double>>(1, 1, std::vector<double>{0.5, 0.5})); })
              .find("dimension mismatch") != std::string::npos);
    CHECK(error_of([] {
              mqms::make_explicit_joint(1, 1, 1, {{column({1}), 0.5}, {column({1}), 0.5}});
          }).find("duplicate channel matrix") != std::string::npos);
    CHECK(error_of([] { mqms::make_explicit_joint(2, 1, 1, {{column({1}), 1.0}}); }).find("dimension mismatch") !=
          std::string::npos);
    CHECK_THROWS_AS(mqms::make_bernoulli(Grid<double>(1, 1, 1.5)), mqms::ModelError);
    CHECK_THROWS_AS(mqms::make_continuous(Grid<mqms::LinkDistribution>(1, 1, mqms::ExponentialLink{0.0})),
                    mqms::ModelError);
    CHECK_THROWS_AS(mqms::make_continuous(Grid<mqms::LinkDistribution>(1, 1, mqms::EmpiricalLink{})),
                    mqms::ModelError);
}

TEST_CASE("explicit models drop zero-probability states") {
    const auto m = mqms::make_explicit_joint(1, 1, 2, {{column({0}), 0.0}, {column({1}), 0.25}, {column({2}), 0.75}});
    CHECK(m.states.size() == 2);
    CHECK(m.link_probability(0, 0, 2) == doctest::Approx(0.75));
    CHECK(m.link_mean(0, 0) == doctest::Approx(1.75));
}

TEST_CASE("enumerate_states examples") {
    SUBCASE("bernoulli N=1 K=1") {
        const auto s = mqms::enumerate_states(mqms::make_bernoulli(Grid<double>(1, 1, 0.5)));
        REQUIRE(s.size() == 2);
        CHECK(s[0].matrix == column({0}));
        CHECK(s[0].probability == 0.5);
        CHECK(s[1].matrix == column({1}));
        CHECK(s[1].probability == 0.5);
    }
    SUBCASE("factored N=1 K=2 uniform on {0,1,2}") {
        const auto s = mqms::enumerate_states(
            mqms::make_factored(2, Grid<std::vector<double>>(1, 2, std::vector<double>(3, 1.0 / 3.0))));
        CHECK(s.size() == 9);
        for (const auto& w : s) CHECK(w.probability == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
    }
    SUBCASE("bernoulli N=2 K=2 has 16 states") {
        const auto m = mqms::make_bernoulli(Grid<double>(2, 2, 0.3));
        CHECK(mqms::state_space_size(m) == 16);
        CHECK(mqms::enumerate_states(m).size() == 16);
    }
    SUBCASE("degenerate links") {
        const auto s = mqms::enumerate_states(mqms::make_bernoulli(Grid<double>(2, 1, {1.0, 0.0})));
        REQUIRE(s.size() == 1);
        CHECK(s[0].matrix == column({1, 0}));
        CHECK(s[0].probability == 1.0);
    }
    SUBCASE("cap exceeded") {
        mqms::EnumerationCaps caps;
        caps.states = 15;
        CHECK_THROWS_AS(mqms::enumerate_states(mqms::make_bernoulli(Grid<double>(2, 2, 0.5)), caps), mqms::CapExceeded);
    }
}

TEST_CASE("per_server_column_distribution examples") {
    const auto two = mqms::per_server_column_distribution(mqms::make_bernoulli(Grid<double>(2, 1, 0.5)), 0);
    REQUIRE(two.size() == 4);
    std::map<std::vector<int>, double> got;
    for (const auto& c : two) got[c.column] = c.probability;
    CHECK(got == std::map<std::vector<int>, double>{{{0, 0}, .25}, {{0, 1}, .25}, {{1, 0}, .25}, {{1, 1}, .25}});

    const auto one = mqms::per_server_column_distribution(
        mqms::make_factored(1, Grid<std::vector<double>>(1, 1, std::vector<double>{0.2, 0.8})), 0);
    REQUIRE(one.size() == 2);
    CHECK(one[0].column == std::vector<int>{0});
    CHECK(one[0].probability == 0.2);
    CHECK(one[1].probability == 0.8);

    const auto degenerate = mqms::per_server_column_distribution(mqms::make_bernoulli(Grid<double>(2, 1, {1.0, 0.0})), 0);
    REQUIRE(degenerate.size() == 1);
    CHECK(degenerate[0].column == std::vector<int>{1, 0});

    const auto joint = mqms::make_explicit_joint(1, 1, 1, {{column({1}), 1.0}});
    CHECK_THROWS_AS(mqms::per_server_column_distribution(joint, 0), mqms::ModelError);
}

TEST_CASE("columns assemble to the joint state law") {
    mqms::Rng rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const int m = testing::uniform_int(rng, 1, 3);
        const int n = testing::uniform_int(rng, 1, 3);
        const int k = testing::uniform_int(rng, 1, 3);
        if (mqms::checked_pow(m + 1, n * k) > 4096) continue;
        const auto model = m == 1 && trial % 2 ? testing::random_bernoulli(rng, n, k) : testing::random_factored(rng, n, k, m);

        std::vector<std::map<std::vector<int>, double>> cols;
        for (int s = 0; s < k; ++s) {
            cols.emplace_back();
            for (const auto& c : mqms::per_server_column_distribution(model, s)) cols.back()[c.column] = c.probability;
        }
        double total = 0.0;
        for (const auto& st : mqms::enumerate_states(model)) {
            double p = 1.0;
            for (int s = 0; s < k; ++s) {
                std::vector<int> col(static_cast<std::size_t>(n));
                for (int q = 0; q < n; ++q) col[static_cast<std::size_t>(q)] = st.matrix(q, s);
                const auto it = cols[static_cast<std::size_t>(s)].find(col);
                p *= it == cols[static_cast<std::size_t>(s)].end() ? 0.0 : it->second;
            }
            CHECK(std::abs(p - st.probability) <= 1e-12);
            total += st.probability;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("link marginals of the enumerated law equal the declared pmfs") {
    mqms::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = testing::uniform_int(rng, 1, 2);
        const auto model = testing::random_factored(rng, 2, 2, m);
        Grid<std::vector<double>> marginal(2, 2, std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
        for (const auto& st : mqms::enumerate_states(model))
            for (int q = 0; q < 2; ++q)
                for (int s = 0; s < 2; ++s) marginal(q, s)[static_cast<std::size_t>(st.matrix(q, s))] += st.probability;
        for (int q = 0; q < 2; ++q)
            for (int s = 0; s < 2; ++s)
                for (int c = 0; c <= m; ++c)
                    CHECK(std::abs(marginal(q, s)[static_cast<std::size_t>(c)] - model.link_pmf(q, s)[static_cast<std::size_t>(c)]) <= 1e-12);
    }
}

TEST_CASE("sampling") {
    SUBCASE("p = 1 everywhere gives the all-ones matrix") {
        const auto model = mqms::make_bernoulli(Grid<double>(3, 2, 1.0));
        mqms::Rng rng(1);
        for (int i = 0; i < 100; ++i) CHECK(mqms::sample_state(model, rng) == ChannelMatrix(3, 2, 1));
    }
    SUBCASE("exponential sample mean") {
        const mqms::LinkDistribution link = mqms::ExponentialLink{2.0};
        mqms::Rng rng(3);
        double s = 0.0;
        const int count = 1'000'000;
        for (int i = 0; i < count; ++i) s += mqms::sample(link, rng);
        CHECK(std::abs(s / count - 2.0) <= 0.01);
        CHECK(mqms::mean(link) == 2.0);
        CHECK(mqms::mean(mqms::UniformLink{3.0}) == 1.5);
        CHECK(mqms::mean(mqms::EmpiricalLink{{1.0, 2.0, 6.0}}) == 3.0);
    }
    SUBCASE("fixed seed reproduces the sequence") {
        mqms::Rng rng(5);
        const auto model = testing::random_factored(rng, 3, 2, 2);
        mqms::Rng a(42), b(42);
        for (int i = 0; i < 200; ++i) CHECK(mqms::sample_state(model, a) == mqms::sample_state(model, b));
        const auto cont = mqms::make_continuous(
            Grid<mqms::LinkDistribution>(1, 2, {mqms::ExponentialLink{1.0}, mqms::UniformLink{2.0}}));
        mqms::Rng c(9), d(9);
        for (int i = 0; i < 200; ++i) CHECK(mqms::sample_state(cont, c) == mqms::sample_state(cont, d));
    }
    SUBCASE("empirical frequencies of sampled matrices match the law") {
        mqms::Rng rng(11);
        const auto model = testing::random_explicit(rng, 2, 2, 2, 4);
        std::map<std::vector<int>, double> freq;
        const int count = 200'000;
        const mqms::ChannelSampler sampler(model);
        ChannelMatrix c;
        for (int i = 0; i < count; ++i) {
            sampler.sample(rng, c);
            freq[{c.cells().begin(), c.cells().end()}] += 1.0 / count;
        }
        for (const auto& st : model.states) {
            const double p = st.probability;
            const double f = freq[{st.matrix.cells().begin(), st.matrix.cells().end()}];
            CHECK(std::abs(f - p) <= 4.0 * std::sqrt(p * (1 - p) / count) + 1e-12);
        }
    }
}

TEST_CASE("fingerprint separates models and is stable") {
    const auto a = mqms::make_bernoulli(Grid<double>(2, 1, 0.5));
    const auto b = mqms::make_bernoulli(Grid<double>(2, 1, 0.5));
    const auto c = mqms::make_bernoulli(Grid<double>(2, 1, 0.25));
    CHECK(mqms::fingerprint(a) == mqms::fingerprint(b));
    CHECK(mqms::fingerprint(a) != mqms::fingerprint(c));
}

}  // TEST_SUITE
