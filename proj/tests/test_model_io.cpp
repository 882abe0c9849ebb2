#include <doctest.h>

#include <string>

#include "mqms/error.hpp"
#include "mqms/model_io.hpp"

using nlohmann::json;

TEST_SUITE("model_io") {

TEST_CASE("parses every model kind") {
    const auto b = mqms::io::parse_discrete_model(json::parse(R"({"N":2,"K":1,"kind":"bernoulli","p":[[0.5],[0.25]]})"));
    CHECK(b.kind == mqms::ChannelKind::bernoulli);
    CHECK(b.success_prob(1, 0) == 0.25);

    const auto f = mqms::io::parse_discrete_model(
        json::parse(R"({"N":1,"K":2,"kind":"factored","M":2,"pmf":[[[0.2,0.3,0.5],[1,0,0]]]})"));
    CHECK(f.max_capacity == 2);
    CHECK(f.link_probability(0, 0, 2) == 0.5);

    const auto e = mqms::io::parse_discrete_model(json::parse(
        R"({"N":2,"K":1,"kind":"explicit_joint","states":[{"C":[[2],[1]],"prob":0.4},{"C":[[0],[3]],"prob":0.6}]})"));
    CHECK(e.max_capacity == 3);
    CHECK(e.states.size() == 2);

    const auto any = mqms::io::parse_model(json::parse(
        R"({"N":2,"K":1,"kind":"continuous","links":[[{"dist":"exponential","mean":2}],[{"dist":"empirical","values":[1,2]}]]})"));
    REQUIRE(std::holds_alternative<mqms::ContinuousChannelModel>(any));
    CHECK(mqms::mean(std::get<mqms::ContinuousChannelModel>(any).links(1, 0)) == 1.5);
}

TEST_CASE("malformed descriptors raise ModelError") {
    const char* bad[] = {
        R"({"K":1,"kind":"bernoulli","p":[[0.5]]})",
        R"({"N":1,"K":1,"kind":"bernoulli","p":[[0.5, 0.5]]})",
        R"({"N":1,"K":1,"kind":"bernoulli","p":[["x"]]})",
        R"({"N":1,"K":1,"kind":"mystery"})",
        R"({"N":1,"K":1,"kind":"factored","M":1,"pmf":[[[0.6,0.6]]]})",
        R"({"N":1,"K":1,"kind":"explicit_joint","states":[{"C":[[1.5]],"prob":1}]})",
        R"({"N":1,"K":1,"kind":"continuous","links":[[{"dist":"exponential","mean":1}]]})",
    };
    for (const char* text : bad) {
        CAPTURE(text);
        CHECK_THROWS_AS(mqms::io::parse_discrete_model(json::parse(text)), mqms::ModelError);
    }
    CHECK_THROWS_AS(mqms::io::parse_continuous_model(json::parse(R"({"N":1,"K":1,"kind":"bernoulli","p":[[0.5]]})")),
                    mqms::ModelError);
    CHECK_THROWS_AS(mqms::io::load_json("/nonexistent/model.json"), mqms::ModelError);
}

TEST_CASE("parses arrivals") {
    const auto a = mqms::io::parse_arrivals(json::parse(
        R"({"queues":[{"type":"bernoulli_batch","q":0.3,"B":2},{"type":"deterministic","rate":0.4},{"type":"pmf","pmf":[0.5,0.3,0.2]}]})"));
    CHECK(a.queues() == 3);
    CHECK(a.mean(0) == doctest::Approx(0.6));
    CHECK(a.mean(1) == doctest::Approx(0.4));
    CHECK(a.mean(2) == doctest::Approx(0.7));
    CHECK_THROWS_AS(mqms::io::parse_arrivals(json::parse(R"({"queues":[{"type":"poisson"}]})")), mqms::ModelError);
}

TEST_CASE("formatting uses 12 significant digits") {
    CHECK(mqms::io::format12(0.1 + 0.2) == "0.3");
    CHECK(mqms::io::format12(1.0 / 3.0) == "0.333333333333");
    CHECK(mqms::io::round12(0.1 + 0.2) == 0.3);
}

TEST_CASE("region and V-hat serialization") {
    const mqms::StabilityRegion r{2, {{{{1, 0}}, 0.5}, {{{1, 1}}, 0.75}}, 0};
    CHECK(mqms::io::region_to_csv(r) == "alpha_1,alpha_2,beta\n1,0,0.5\n1,1,0.75\n");
    CHECK(mqms::io::region_to_json(r).dump() ==
          R"({"N":2,"inequalities":[{"alpha":[1,0],"beta":0.5},{"alpha":[1,1],"beta":0.75}]})");
    const auto v = mqms::io::vhat_to_json(2, 1, {{{0, 1}}, {{1, 0}}, {{1, 1}}});
    CHECK(v["vhat_size"] == 3);
    CHECK(v["wn_minus_zero"] == 3);
}

}  // TEST_SUITE
