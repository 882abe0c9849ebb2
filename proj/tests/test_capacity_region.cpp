#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "mqms/alpha_sets.hpp"
#include "mqms/capacity_region.hpp"
#include "mqms/error.hpp"
#include "test_support.hpp"

using mqms::Grid;

namespace {

mqms::DiscreteChannelModel bern_half() { return mqms::make_bernoulli(Grid<double>(2, 1, 0.5)); }

mqms::DiscreteChannelModel single_state(std::vector<int> column, int max_capacity) {
    const int n = static_cast<int>(column.size());
    return mqms::make_explicit_joint(n, 1, max_capacity, {{mqms::ChannelMatrix(n, 1, std::move(column)), 1.0}});
}

std::map<std::vector<std::int64_t>, double> as_map(const mqms::StabilityRegion& r) {
    std::map<std::vector<std::int64_t>, double> m;
    for (const auto& i : r.inequalities) m[i.alpha.coords] = i.beta;
    return m;
}

std::vector<double> random_alpha(mqms::Rng& rng, int n) {
    std::vector<double> a(static_cast<std::size_t>(n));
    for (auto& x : a) x = testing::uniform_int(rng, 0, 6) * mqms::uniform01(rng);
    a[static_cast<std::size_t>(testing::uniform_int(rng, 0, n - 1))] += 0.5;
    return a;
}

}  // namespace

TEST_SUITE("capacity_region") {

TEST_CASE("support_function examples") {
    const auto m = bern_half();
    CHECK(mqms::support_function(m, std::vector<double>{1, 1}) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(mqms::support_function(m, std::vector<double>{2, 2}) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(mqms::support_function(single_state({2, 1}, 2), std::vector<double>{0, 1}) == 1.0);

    mqms::Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto model = testing::random_discrete(rng, 3, 2, 2);
        for (int n = 0; n < 3; ++n) {
            std::vector<double> e(3, 0.0);
            e[static_cast<std::size_t>(n)] = 1.0;
            double expected = 0.0;
            for (int k = 0; k < 2; ++k) expected += model.link_mean(n, k);
            CHECK(mqms::support_function(model, e) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(mqms::support_function(m, std::vector<double>{1}), mqms::ModelError);
    CHECK_THROWS_AS(mqms::support_function(m, std::vector<double>{-1, 1}), mqms::ModelError);
}

TEST_CASE("support_vertex examples") {
    const auto m = bern_half();
    const auto v10 = mqms::support_vertex(m, std::vector<double>{1, 0});
    CHECK(v10.rates == std::vector<double>{0.5, 0.0});
    const auto v11 = mqms::support_vertex(m, std::vector<double>{1, 1});
    CHECK(v11[0] == doctest::Approx(0.5));
    CHECK(v11[1] == doctest::Approx(0.25));
    const auto v11h = mqms::support_vertex(m, std::vector<double>{1, 1}, mqms::TieRule::highest_index);
    CHECK(v11h[0] == doctest::Approx(0.25));
    CHECK(v11h[1] == doctest::Approx(0.5));
    const auto det = mqms::support_vertex(single_state({2, 1}, 2), std::vector<double>{1, 1});
    CHECK(det.rates == std::vector<double>{2.0, 0.0});
}

TEST_CASE("brute_force_support examples and caps") {
    CHECK(mqms::brute_force_support(bern_half(), std::vector<double>{1, 1}) == doctest::Approx(0.75));
    CHECK(mqms::brute_force_support(single_state({2, 1}, 2), std::vector<double>{0, 1}) == 1.0);
    const auto big = mqms::make_bernoulli(Grid<double>(4, 4, 0.5));
    CHECK_THROWS_AS(mqms::brute_force_support(big, std::vector<double>{1, 1, 1, 1}), mqms::CapExceeded);
}

TEST_CASE("build_region examples") {
    CHECK(as_map(mqms::build_region(bern_half())) ==
          std::map<std::vector<std::int64_t>, double>{{{0, 1}, 0.5}, {{1, 0}, 0.5}, {{1, 1}, 0.75}});
    CHECK(as_map(mqms::build_region(single_state({1, 1}, 1))) ==
          std::map<std::vector<std::int64_t>, double>{{{0, 1}, 1.0}, {{1, 0}, 1.0}, {{1, 1}, 1.0}});

    mqms::Rng rng(8);
    CHECK(mqms::build_region(testing::random_factored(rng, 2, 2, 2)).inequalities.size() == 5);

    const auto one = mqms::build_region(mqms::make_bernoulli(Grid<double>(1, 1, 0.7)));
    REQUIRE(one.inequalities.size() == 1);
    CHECK(one.inequalities[0].alpha.coords == std::vector<std::int64_t>{1});
    CHECK(one.inequalities[0].beta == doctest::Approx(0.7));

    const auto model = mqms::make_bernoulli(Grid<double>(2, 1, 0.5));
    CHECK(mqms::build_region(model).provenance == mqms::fingerprint(model));
}

TEST_CASE("onoff_region examples") {
    const auto r = mqms::onoff_region(Grid<double>(2, 2, 0.5));
    CHECK(as_map(r)[{1, 1}] == doctest::Approx(1.5));
    CHECK(mqms::onoff_region(Grid<double>(3, 2, 0.3)).inequalities.size() == 7);

    mqms::RegionOptions opts;
    opts.onoff_fast_path = true;
    const auto fast = mqms::build_region(mqms::make_bernoulli(Grid<double>(3, 2, 0.3)), opts);
    CHECK(fast.inequalities.size() == 7);
}

TEST_CASE("membership_margin examples") {
    mqms::StabilityRegion half{1, {{{{1}}, 0.5}}, 0};
    CHECK(mqms::membership_margin(half, {{0.3}}) == doctest::Approx(0.2));
    const auto region = mqms::build_region(bern_half());
    const double on = mqms::membership_margin(region, {{0.375, 0.375}});
    CHECK(on == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(mqms::classify(on) == mqms::Verdict::boundary);
    const double out = mqms::membership_margin(region, {{0.5, 0.5}});
    CHECK(out == doctest::Approx(-0.125));
    CHECK(mqms::classify(out) == mqms::Verdict::outside);
    CHECK(mqms::classify(0.1) == mqms::Verdict::interior);
    CHECK_THROWS_AS(mqms::membership_margin(region, {{0.1}}), mqms::ModelError);
    CHECK_THROWS_AS(mqms::membership_margin(region, {{-0.1, 0.1}}), mqms::ModelError);
    CHECK_THROWS_AS(mqms::membership_margin(mqms::StabilityRegion{2, {}, 0}, {{0.1, 0.1}}), mqms::ModelError);
}

TEST_CASE("positive homogeneity") {
    mqms::Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = testing::uniform_int(rng, 1, 4);
        const auto model = testing::random_discrete(rng, n, testing::uniform_int(rng, 1, 3), testing::uniform_int(rng, 1, 3));
        const auto alpha = random_alpha(rng, n);
        const double h = mqms::support_function(model, alpha);
        for (double q : {0.5, 2.0, 10.0}) {
            auto scaled = alpha;
            for (auto& x : scaled) x *= q;
            CHECK(std::abs(mqms::support_function(model, scaled) - q * h) <= 1e-9 * std::max(1.0, q * h));
        }
    }
}

TEST_CASE("subadditivity and monotonicity") {
    mqms::Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = testing::uniform_int(rng, 1, 4);
        const auto model = testing::random_discrete(rng, n, testing::uniform_int(rng, 1, 3), testing::uniform_int(rng, 1, 3));
        const auto a = random_alpha(rng, n);
        const auto b = random_alpha(rng, n);
        std::vector<double> sum(a.size());
        std::transform(a.begin(), a.end(), b.begin(), sum.begin(), std::plus<>());
        CHECK(mqms::support_function(model, sum) <=
              mqms::support_function(model, a) + mqms::support_function(model, b) + 1e-9);
        // a <= a + b componentwise
        CHECK(mqms::support_function(model, a) <= mqms::support_function(model, sum) + 1e-12);
    }
}

TEST_CASE("support_function and brute force agree with the independent enumeration on every V-hat direction") {
    mqms::Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = testing::uniform_int(rng, 2, 3);
        const int k = testing::uniform_int(rng, 1, 3);
        const int m = testing::uniform_int(rng, 1, 2);
        const auto model = testing::random_discrete(rng, n, k, m);
        for (const auto& a : mqms::build_Vhat(m, n)) {
            const auto alpha = a.as_real();
            const double oracle = testing::enumerated_support(model, alpha);
            CHECK(std::abs(mqms::support_function(model, alpha) - oracle) <= 1e-9);
            if (testing::within_brute_force_caps(model))
                CHECK(std::abs(mqms::brute_force_support(model, alpha) - oracle) <= 1e-9);
            else
                CHECK_THROWS_AS(mqms::brute_force_support(model, alpha), mqms::CapExceeded);
        }
    }
}

TEST_CASE("indicator directions match the ON-OFF closed form") {
    mqms::Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = testing::uniform_int(rng, 1, 4);
        const auto model = testing::random_bernoulli(rng, n, testing::uniform_int(rng, 1, 4));
        const auto closed = mqms::onoff_region(model.success_prob);
        CHECK(closed.inequalities.size() == (std::size_t{1} << n) - 1);
        for (std::uint64_t q = 1; q < (std::uint64_t{1} << n); ++q) {
            std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
            for (int i = 0; i < n; ++i) alpha[static_cast<std::size_t>(i)] = (q >> i) & 1U ? 1.0 : 0.0;
            const double expected = testing::onoff_closed_form(model.success_prob, q);
            CHECK(std::abs(mqms::support_function(model, alpha) - expected) <= 1e-12);
        }
        for (const auto& ineq : closed.inequalities) {
            std::uint64_t q = 0;
            for (std::size_t i = 0; i < ineq.alpha.size(); ++i) q |= static_cast<std::uint64_t>(ineq.alpha.coords[i]) << i;
            CHECK(std::abs(ineq.beta - testing::onoff_closed_form(model.success_prob, q)) <= 1e-12);
        }
    }
}

TEST_CASE("support vertices attain the support value and lie in the region") {
    mqms::Rng rng(53);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = testing::uniform_int(rng, 1, 3);
        const int m = testing::uniform_int(rng, 1, 2);
        const auto model = testing::random_discrete(rng, n, testing::uniform_int(rng, 1, 3), m);
        const auto region = mqms::build_region(model);
        for (int rep = 0; rep < 5; ++rep) {
            const auto alpha = random_alpha(rng, n);
            for (auto tie : {mqms::TieRule::lowest_index, mqms::TieRule::highest_index}) {
                const auto v = mqms::support_vertex(model, alpha, tie);
                CHECK(std::abs(testing::dot(alpha, v.rates) - mqms::support_function(model, alpha)) <= 1e-9);
                CHECK(mqms::membership_margin(region, v) >= -1e-9);
            }
        }
    }
}

TEST_CASE("build_region commutes with queue permutations") {
    mqms::Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3;
        const int k = 2;
        const auto model = testing::random_factored(rng, n, k, 2);
        std::vector<int> perm{0, 1, 2};
        std::shuffle(perm.begin(), perm.end(), rng);
        Grid<std::vector<double>> permuted(n, k);
        for (int q = 0; q < n; ++q)
            for (int s = 0; s < k; ++s) permuted(q, s) = model.link_pmf(perm[static_cast<std::size_t>(q)], s);
        const auto original = as_map(mqms::build_region(model));
        const auto other = mqms::build_region(mqms::make_factored(2, std::move(permuted)));
        REQUIRE(other.inequalities.size() == original.size());
        for (const auto& ineq : other.inequalities) {
            // alpha acts on permuted queue q = original queue perm[q]
            std::vector<std::int64_t> back(static_cast<std::size_t>(n));
            for (int q = 0; q < n; ++q) back[static_cast<std::size_t>(perm[static_cast<std::size_t>(q)])] = ineq.alpha.coords[static_cast<std::size_t>(q)];
            REQUIRE(original.count(back) == 1);
            CHECK(std::abs(original.at(back) - ineq.beta) <= 1e-12);
        }
    }
}

TEST_CASE("enumeration caps are enforced") {
    mqms::EnumerationCaps caps;
    caps.states = 3;
    CHECK_THROWS_AS(mqms::support_function(bern_half(), std::vector<double>{1, 1}, caps), mqms::CapExceeded);
    mqms::RegionOptions opts;
    opts.caps.vhat = 5;
    mqms::Rng rng(1);
    CHECK_THROWS_AS(mqms::build_region(testing::random_factored(rng, 3, 1, 2), opts), mqms::CapExceeded);
}

}  // TEST_SUITE
