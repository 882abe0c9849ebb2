#include "mqms/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mqms/error.hpp"

namespace mqms::io {

namespace {

using nlohmann::json;

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ModelError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

int int_field(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_number_integer()) throw ModelError(std::string("field \"") + key + "\" must be an integer");
    return v.get<int>();
}

double number(const json& v, const char* what) {
    if (!v.is_number()) throw ModelError(std::string(what) + " must be a number");
    return v.get<double>();
}

std::vector<double> numbers(const json& v, const char* what) {
    if (!v.is_array()) throw ModelError(std::string(what) + " must be an array");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(number(x, what));
    return out;
}

// N x K nested array accessor with shape checks.
template <typename F>
void for_each_cell(const json& rows, int n_rows, int n_cols, const char* what, F&& f) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != n_rows)
        throw ModelError(std::string("dimension mismatch: ") + what + " must have N rows");
    for (int n = 0; n < n_rows; ++n) {
        const auto& row = rows[static_cast<std::size_t>(n)];
        if (!row.is_array() || static_cast<int>(row.size()) != n_cols)
            throw ModelError(std::string("dimension mismatch: ") + what + " rows must have K entries");
        for (int k = 0; k < n_cols; ++k) f(n, k, row[static_cast<std::size_t>(k)]);
    }
}

LinkDistribution parse_link(const json& j) {
    const auto& dist = field(j, "dist");
    if (!dist.is_string()) throw ModelError("\"dist\" must be a string");
    const auto name = dist.get<std::string>();
    if (name == "exponential") return ExponentialLink{number(field(j, "mean"), "exponential mean")};
    if (name == "uniform") return UniformLink{number(field(j, "b"), "uniform bound")};
    if (name == "empirical") return EmpiricalLink{numbers(field(j, "values"), "empirical values")};
    throw ModelError("unknown link distribution \"" + name + "\"");
}

std::string kind_of(const json& j) {
    const auto& k = field(j, "kind");
    if (!k.is_string()) throw ModelError("\"kind\" must be a string");
    return k.get<std::string>();
}

template <typename F>
auto translate(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ModelError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

DiscreteChannelModel parse_discrete_model(const json& j) {
    return translate([&] {
        const int n = int_field(j, "N");
        const int k = int_field(j, "K");
        if (n < 1 || k < 1) throw ModelError("dimension mismatch: N and K must be positive");
        const auto kind = kind_of(j);

        if (kind == "bernoulli") {
            Grid<double> p(n, k);
            for_each_cell(field(j, "p"), n, k, "p", [&](int r, int c, const json& v) { p(r, c) = number(v, "p"); });
            return make_bernoulli(std::move(p));
        }
        if (kind == "factored") {
            const int m = int_field(j, "M");
            Grid<std::vector<double>> pmf(n, k);
            for_each_cell(field(j, "pmf"), n, k, "pmf",
                          [&](int r, int c, const json& v) { pmf(r, c) = numbers(v, "pmf"); });
            return make_factored(m, std::move(pmf));
        }
        if (kind == "explicit_joint") {
            const auto& list = field(j, "states");
            if (!list.is_array()) throw ModelError("\"states\" must be an array");
            std::vector<WeightedState> states;
            int largest = 1;
            for (const auto& s : list) {
                ChannelMatrix c(n, k);
                for_each_cell(field(s, "C"), n, k, "C", [&](int r, int col, const json& v) {
                    if (!v.is_number_integer()) throw ModelError("channel capacities must be integers");
                    c(r, col) = v.get<int>();
                    largest = std::max(largest, c(r, col));
                });
                states.push_back({std::move(c), number(field(s, "prob"), "prob")});
            }
            const int m = j.contains("M") ? int_field(j, "M") : largest;
            return make_explicit_joint(n, k, m, std::move(states));
        }
        if (kind == "continuous") throw ModelError("this command needs a discrete channel model");
        throw ModelError("unknown model kind \"" + kind + "\"");
    });
}

ContinuousChannelModel parse_continuous_model(const json& j) {
    return translate([&] {
        const int n = int_field(j, "N");
        const int k = int_field(j, "K");
        if (n < 1 || k < 1) throw ModelError("dimension mismatch: N and K must be positive");
        if (kind_of(j) != "continuous") throw ModelError("this command needs a continuous channel model");
        Grid<LinkDistribution> links(n, k);
        for_each_cell(field(j, "links"), n, k, "links", [&](int r, int c, const json& v) { links(r, c) = parse_link(v); });
        return make_continuous(std::move(links));
    });
}

AnyChannelModel parse_model(const json& j) {
    if (translate([&] { return kind_of(j); }) == "continuous") return parse_continuous_model(j);
    return parse_discrete_model(j);
}

ArrivalModel parse_arrivals(const json& j) {
    return translate([&] {
        const auto& list = field(j, "queues");
        if (!list.is_array()) throw ModelError("\"queues\" must be an array");
        std::vector<QueueArrivals> queues;
        for (const auto& q : list) {
            const auto& type = field(q, "type");
            if (!type.is_string()) throw ModelError("arrival \"type\" must be a string");
            const auto name = type.get<std::string>();
            if (name == "deterministic") {
                queues.emplace_back(DeterministicArrivals{number(field(q, "rate"), "rate")});
            } else if (name == "bernoulli_batch") {
                queues.emplace_back(BatchArrivals{number(field(q, "q"), "q"), q.contains("B") ? int_field(q, "B") : 1});
            } else if (name == "pmf") {
                queues.emplace_back(PmfArrivals{numbers(field(q, "pmf"), "pmf")});
            } else {
                throw ModelError("unknown arrival type \"" + name + "\"");
            }
        }
        return ArrivalModel(std::move(queues));
    });
}

double round12(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(format12(v).c_str(), nullptr);
}

std::string format12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Json region_to_json(const StabilityRegion& region) {
    Json out;
    out["N"] = region.queues;
    Json list = Json::array();
    for (const auto& ineq : region.inequalities) {
        Json e;
        e["alpha"] = ineq.alpha.coords;
        e["beta"] = round12(ineq.beta);
        list.push_back(std::move(e));
    }
    out["inequalities"] = std::move(list);
    return out;
}

std::string region_to_csv(const StabilityRegion& region) {
    std::ostringstream os;
    for (int n = 1; n <= region.queues; ++n) os << "alpha_" << n << ',';
    os << "beta\n";
    for (const auto& ineq : region.inequalities) {
        for (auto a : ineq.alpha.coords) os << a << ',';
        os << format12(ineq.beta) << '\n';
    }
    return os.str();
}

Json vhat_to_json(int queues, int max_capacity, const std::vector<AlphaVector>& vhat) {
    Json out;
    out["N"] = queues;
    out["M"] = max_capacity;
    Json list = Json::array();
    for (const auto& a : vhat) list.push_back(a.coords);
    out["vhat"] = std::move(list);
    out["vhat_size"] = vhat.size();
    out["wn_minus_zero"] = wn_count(max_capacity, queues) - 1;
    return out;
}

}  // namespace mqms::io
