// mqms: stability regions, Maximum-Weight simulation, fluid boundaries and
// fairness allocation for multi-queue multi-server systems.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mqms/alpha_sets.hpp"
#include "mqms/capacity_region.hpp"
#include "mqms/error.hpp"
#include "mqms/fairness.hpp"
#include "mqms/fluid_region.hpp"
#include "mqms/model_io.hpp"
#include "mqms/parallel.hpp"
#include "mqms/simulator.hpp"

namespace {

using mqms::io::Json;
using mqms::io::round12;

constexpr const char* kTool = "mqms";
constexpr double kOracleTol = 1e-9;

struct RunConfig {
    std::string subcommand;
    std::string model_path;
    std::string arrivals_path;
    std::string out_path;
    std::string format = "json";
    std::uint64_t seed = 7;
    int threads = 0;
    std::uint64_t state_cap = 10'000'000;
    std::uint64_t vhat_cap = 10'000'000;

    // vhat / delay-bound
    int queues = 2;
    int max_capacity = 1;
    int servers = 1;
    double a_max_sq = 1.0;
    double delta = 0.0;

    // check
    std::string lambda;
    bool onoff = false;

    // simulate
    std::string policy = "mw";
    std::int64_t slots = 100'000;
    int reps = 1;
    std::string trace_path;

    // fluid-boundary
    int directions = 181;
    std::size_t samples = 100'000;
    std::size_t grid = 201;

    // fairness
    std::string utility = "log";
    std::string weights;
    std::string caps;
    double eps = 1e-6;
    double alpha_fair = 0.5;
    double tol = 1e-6;
    int max_iters = 10'000;
    std::string step = "line";

    mqms::EnumerationCaps enumeration_caps() const { return {state_cap, vhat_cap}; }
};

// Resolved configuration, hashed into every output. Thread count is excluded:
// outputs do not depend on it.
Json describe(const RunConfig& c) {
    Json j;
    j["subcommand"] = c.subcommand;
    j["state_cap"] = c.state_cap;
    j["vhat_cap"] = c.vhat_cap;
    if (c.subcommand == "vhat") {
        j["N"] = c.queues;
        j["M"] = c.max_capacity;
    } else if (c.subcommand == "delay-bound") {
        j["N"] = c.queues;
        j["a_max_sq"] = c.a_max_sq;
        j["M"] = c.max_capacity;
        j["K"] = c.servers;
        j["delta"] = c.delta;
    } else {
        j["model"] = c.model_path;
    }
    if (c.subcommand == "region") {
        j["format"] = c.format;
        j["onoff"] = c.onoff;
    }
    if (c.subcommand == "check") j["lambda"] = c.lambda;
    if (c.subcommand == "simulate") {
        j["arrivals"] = c.arrivals_path;
        j["policy"] = c.policy;
        j["slots"] = c.slots;
        j["seed"] = c.seed;
        j["reps"] = c.reps;
    }
    if (c.subcommand == "fluid-boundary") {
        j["directions"] = c.directions;
        j["samples"] = c.samples;
        j["seed"] = c.seed;
        j["grid"] = c.grid;
    }
    if (c.subcommand == "fairness") {
        j["utility"] = c.utility;
        j["weights"] = c.weights;
        j["caps"] = c.caps;
        j["eps"] = c.eps;
        j["alpha"] = c.alpha_fair;
        j["tol"] = c.tol;
        j["max_iters"] = c.max_iters;
        j["step"] = c.step;
    }
    return j;
}

std::string config_hash(const Json& config) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

Json meta(const std::string& hash) {
    Json m;
    m["tool"] = kTool;
    m["version"] = MQMS_VERSION;
    m["config_hash"] = hash;
    return m;
}

std::string csv_banner(const std::string& hash) {
    return std::string("# ") + kTool + " " + MQMS_VERSION + " config_hash=" + hash + "\n";
}

void emit(const RunConfig& c, const std::string& text) {
    if (c.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(c.out_path);
    if (!out) throw mqms::ModelError("cannot write " + c.out_path);
    out << text;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf" || item == "infinity") {
            out.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || *end != '\0') throw mqms::ModelError(std::string("bad number in ") + what + ": \"" + item + "\"");
        out.push_back(v);
    }
    return out;
}

mqms::DiscreteChannelModel load_discrete(const RunConfig& c) {
    return mqms::io::parse_discrete_model(mqms::io::load_json(c.model_path));
}

int cmd_vhat(const RunConfig& c, const std::string& hash) {
    const auto vhat = mqms::build_Vhat(c.max_capacity, c.queues, c.enumeration_caps());
    Json out;
    out["meta"] = meta(hash);
    const Json body = mqms::io::vhat_to_json(c.queues, c.max_capacity, vhat);
    for (const auto& [k, v] : body.items()) out[k] = v;
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_region(const RunConfig& c, const std::string& hash) {
    const auto model = load_discrete(c);
    mqms::RegionOptions opts;
    opts.caps = c.enumeration_caps();
    opts.onoff_fast_path = c.onoff;
    const auto region = mqms::build_region(model, opts);
    if (c.format == "csv") {
        emit(c, csv_banner(hash) + mqms::io::region_to_csv(region));
        return 0;
    }
    Json out;
    out["meta"] = meta(hash);
    const Json body = mqms::io::region_to_json(region);
    for (const auto& [k, v] : body.items()) out[k] = v;
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_check(const RunConfig& c, const std::string& hash) {
    const auto model = load_discrete(c);
    mqms::RegionOptions opts;
    opts.caps = c.enumeration_caps();
    const auto region = mqms::build_region(model, opts);
    const mqms::RatePoint lambda{parse_list(c.lambda, "--lambda")};
    const double delta = mqms::membership_margin(region, lambda);
    Json out;
    out["meta"] = meta(hash);
    out["lambda"] = lambda.rates;
    out["delta"] = round12(delta);
    out["verdict"] = mqms::to_string(mqms::classify(delta));
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_simulate(const RunConfig& c, const std::string& hash) {
    const auto model = load_discrete(c);
    const auto arrivals = mqms::io::parse_arrivals(mqms::io::load_json(c.arrivals_path));

    mqms::SimConfig sim;
    if (c.policy == "mw") sim.policy = mqms::Policy::mw;
    else if (c.policy == "as_lcq") sim.policy = mqms::Policy::as_lcq;
    else throw mqms::ModelError("unknown policy \"" + c.policy + "\"");
    sim.slots = c.slots;
    sim.seed = c.seed;
    sim.replications = c.reps;

    std::ofstream trace;
    if (!c.trace_path.empty()) {
        trace.open(c.trace_path);
        if (!trace) throw mqms::ModelError("cannot write " + c.trace_path);
        trace << csv_banner(hash) << 't';
        for (const char* col : {"X", "served", "arrived"})
            for (int n = 1; n <= model.queues; ++n) trace << ',' << col << '_' << n;
        trace << '\n';
        sim.trace = [&trace](const mqms::TraceRow& row) {
            trace << row.t;
            for (auto v : row.queue_lengths) trace << ',' << v;
            for (auto v : row.served) trace << ',' << v;
            for (auto v : row.arrived) trace << ',' << v;
            trace << '\n';
        };
    }

    const auto report = mqms::run(model, arrivals, sim);

    mqms::RegionOptions opts;
    opts.caps = c.enumeration_caps();
    const auto region = mqms::build_region(model, opts);
    const auto lambda = arrivals.rates();
    const double delta = mqms::membership_margin(region, lambda);

    std::vector<double> per_queue(static_cast<std::size_t>(model.queues), 0.0);
    for (const auto& s : report.replications)
        for (std::size_t n = 0; n < per_queue.size(); ++n)
            per_queue[n] += s.per_queue_avg[n] / static_cast<double>(report.replications.size());

    Json out;
    out["meta"] = meta(hash);
    out["lambda"] = lambda.rates;
    out["delta"] = round12(delta);
    out["avg_aggregate_occupancy"] = round12(report.mean_avg_occupancy);
    out["avg_aggregate_occupancy_stderr"] = round12(report.std_error_avg_occupancy);
    Json pq = Json::array();
    for (double v : per_queue) pq.push_back(round12(v));
    out["per_queue_avgs"] = pq;
    Json thr = Json::array();
    for (double v : report.mean_throughput) thr.push_back(round12(v));
    out["throughput"] = thr;
    if (delta > 0.0) {
        const double bound = mqms::delay_bound(model.queues, arrivals.a_max_sq(), model.max_capacity, model.servers, delta);
        out["bound"] = round12(bound);
        bool within = true;
        for (const auto& s : report.replications) within = within && s.avg_aggregate_occupancy <= bound;
        out["bound_holds"] = within;
    }
    out["verdict"] = mqms::to_string(mqms::classify(delta));
    Json reps = Json::array();
    for (const auto& s : report.replications) {
        Json r;
        r["replication"] = s.replication;
        r["seed"] = s.seed;
        r["avg_aggregate_occupancy"] = round12(s.avg_aggregate_occupancy);
        r["final_aggregate"] = s.final_aggregate();
        reps.push_back(std::move(r));
    }
    out["replications"] = std::move(reps);
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_delay_bound(const RunConfig& c, const std::string& hash) {
    Json out;
    out["meta"] = meta(hash);
    out["bound"] = round12(mqms::delay_bound(c.queues, c.a_max_sq, c.max_capacity, c.servers, c.delta));
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_fluid_boundary(const RunConfig& c, const std::string& hash) {
    const auto model = mqms::io::parse_continuous_model(mqms::io::load_json(c.model_path));
    mqms::TraceOptions opts;
    opts.directions = c.directions;
    opts.samples = c.samples;
    opts.seed = c.seed;
    opts.grid_points = c.grid;
    const auto curve = mqms::boundary_trace(model, opts);

    std::ostringstream os;
    os << csv_banner(hash) << "lambda1,lambda2,stderr\n";
    for (const auto& p : curve.points())
        os << mqms::io::format12(p.lambda1) << ',' << mqms::io::format12(p.lambda2) << ','
           << mqms::io::format12(p.std_error) << '\n';
    emit(c, os.str());
    return 0;
}

int cmd_fairness(const RunConfig& c, const std::string& hash) {
    const auto model = load_discrete(c);
    const auto n = static_cast<std::size_t>(model.queues);

    mqms::UtilitySpec spec;
    if (c.utility == "linear") {
        auto w = c.weights.empty() ? std::vector<double>(n, 1.0) : parse_list(c.weights, "--weights");
        if (w.size() != n) throw mqms::ModelError("--weights needs one value per queue");
        for (double x : w) spec.utilities.emplace_back(mqms::LinearUtility{x});
    } else if (c.utility == "log") {
        spec.utilities.assign(n, mqms::LogUtility{c.eps});
    } else if (c.utility == "alpha-fair") {
        spec.utilities.assign(n, mqms::AlphaFairUtility{c.alpha_fair});
    } else {
        throw mqms::ModelError("unknown utility \"" + c.utility + "\"");
    }
    spec.caps = c.caps.empty() ? std::vector<double>(n, std::numeric_limits<double>::infinity())
                               : parse_list(c.caps, "--caps");
    if (spec.caps.size() != n) throw mqms::ModelError("--caps needs one value per queue");

    mqms::FairnessOptions opts;
    opts.tol = c.tol;
    opts.max_iters = c.max_iters;
    opts.caps = c.enumeration_caps();
    if (c.step == "line") opts.step = mqms::StepRule::line_search;
    else if (c.step == "fixed") opts.step = mqms::StepRule::fixed;
    else throw mqms::ModelError("--step must be line or fixed");

    const auto sol = mqms::solve_fairness(model, spec, opts);
    Json out;
    out["meta"] = meta(hash);
    Json r = Json::array();
    for (double v : sol.r_star.rates) r.push_back(round12(v));
    out["r_star"] = r;
    out["objective"] = round12(sol.objective);
    out["gap"] = round12(sol.gap);
    out["iterations"] = sol.iterations;
    Json binding = Json::array();
    for (auto i : sol.binding) {
        Json b;
        b["alpha"] = sol.region.inequalities[i].alpha.coords;
        b["beta"] = round12(sol.region.inequalities[i].beta);
        b["slack"] = round12(sol.slack[i]);
        binding.push_back(std::move(b));
    }
    out["binding_constraints"] = binding;
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_oracle_check(const RunConfig& c, const std::string& hash) {
    const auto model = load_discrete(c);
    std::ostringstream os;
    os << csv_banner(hash);

    std::vector<mqms::AlphaVector> directions;
    if (model.queues == 1) directions.push_back({{1}});
    else directions = mqms::build_Vhat(model.max_capacity, model.queues, c.enumeration_caps());

    double worst = 0.0;
    std::size_t agree = 0;
    for (const auto& a : directions) {
        const auto alpha = a.as_real();
        const double d = std::abs(mqms::support_function(model, alpha, c.enumeration_caps()) -
                                  mqms::brute_force_support(model, alpha));
        worst = std::max(worst, d);
        agree += d <= kOracleTol;
    }
    os << "support_function == brute_force on " << agree << '/' << directions.size() << " directions\n";
    os << "max deviation (brute force): " << mqms::io::format12(worst) << '\n';
    bool ok = agree == directions.size();

    if (model.kind == mqms::ChannelKind::bernoulli) {
        const auto closed = mqms::onoff_region(model.success_prob);
        double worst_cf = 0.0;
        std::size_t agree_cf = 0;
        for (const auto& ineq : closed.inequalities) {
            const double d = std::abs(mqms::support_function(model, ineq.alpha, c.enumeration_caps()) - ineq.beta);
            worst_cf = std::max(worst_cf, d);
            agree_cf += d <= kOracleTol;
        }
        os << "support_function == ON-OFF closed form on " << agree_cf << '/' << closed.inequalities.size()
           << " subsets\n";
        os << "max deviation (closed form): " << mqms::io::format12(worst_cf) << '\n';
        ok = ok && agree_cf == closed.inequalities.size();
    }
    emit(c, os.str());
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Stability regions and scheduling for multi-queue multi-server systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kTool) + " " + MQMS_VERSION);
    app.add_option("--threads", cfg.threads, "Worker threads for parallel kernels (0 = OpenMP default)")
        ->envname("MQMS_THREADS")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--state-cap", cfg.state_cap, "Cap on enumerated channel states and columns")
        ->check(CLI::PositiveNumber);
    app.add_option("--vhat-cap", cfg.vhat_cap, "Cap on |W|^N direction candidates")->check(CLI::PositiveNumber);

    auto* vhat = app.add_subcommand("vhat", "Enumerate the direction set V-hat");
    vhat->add_option("--N", cfg.queues, "Number of queues")->required()->check(CLI::Range(2, 62));
    vhat->add_option("--M", cfg.max_capacity, "Maximum link capacity")->required()->check(CLI::PositiveNumber);
    vhat->add_option("--out", cfg.out_path, "Output file (default stdout)");

    auto* region = app.add_subcommand("region", "Stability-region inequalities of a discrete model");
    region->add_option("--model", cfg.model_path, "Model JSON")->required()->check(CLI::ExistingFile);
    region->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    region->add_flag("--onoff", cfg.onoff, "Use the 2^N - 1 subset inequalities for bernoulli models");
    region->add_option("--out", cfg.out_path, "Output file (default stdout)");

    auto* check = app.add_subcommand("check", "Margin of a rate vector against the stability region");
    check->add_option("--model", cfg.model_path, "Model JSON")->required()->check(CLI::ExistingFile);
    check->add_option("--lambda", cfg.lambda, "Comma-separated arrival rates")->required();
    check->add_option("--out", cfg.out_path, "Output file (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "Slot-level simulation under MW or AS/LCQ");
    simulate->add_option("--model", cfg.model_path, "Model JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--arrivals", cfg.arrivals_path, "Arrivals JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--policy", cfg.policy, "mw or as_lcq")->check(CLI::IsMember({"mw", "as_lcq"}));
    simulate->add_option("--slots", cfg.slots, "Slots per replication")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", cfg.seed, "Base seed; replication r uses seed + r");
    simulate->add_option("--reps", cfg.reps, "Replications")->check(CLI::PositiveNumber);
    simulate->add_option("--trace", cfg.trace_path, "Per-slot CSV trace of replication 0");
    simulate->add_option("--out", cfg.out_path, "Summary JSON file (default stdout)");

    auto* bound = app.add_subcommand("delay-bound", "Occupancy bound (N A^2 + (MK)^2) / (2 delta)");
    bound->add_option("--N", cfg.queues, "Number of queues")->required()->check(CLI::PositiveNumber);
    bound->add_option("--a-max-sq", cfg.a_max_sq, "Bound on E[A_n^2]")->required()->check(CLI::NonNegativeNumber);
    bound->add_option("--M", cfg.max_capacity, "Maximum link capacity")->required()->check(CLI::PositiveNumber);
    bound->add_option("--K", cfg.servers, "Number of servers")->required()->check(CLI::PositiveNumber);
    bound->add_option("--delta", cfg.delta, "Margin delta")->required();
    bound->add_option("--out", cfg.out_path, "Output file (default stdout)");

    auto* fluid = app.add_subcommand("fluid-boundary", "Trace the two-queue fluid stability boundary");
    fluid->add_option("--model", cfg.model_path, "Continuous model JSON")->required()->check(CLI::ExistingFile);
    fluid->add_option("--directions", cfg.directions, "Number of directions")->check(CLI::Range(3, 1'000'000));
    fluid->add_option("--samples", cfg.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
    fluid->add_option("--seed", cfg.seed, "Sampling seed");
    fluid->add_option("--grid", cfg.grid, "lambda1 grid points")->check(CLI::Range(2, 10'000'000));
    fluid->add_option("--out", cfg.out_path, "Output CSV (default stdout)");

    auto* fair = app.add_subcommand("fairness", "Utility-fair rate allocation over the stability region");
    fair->add_option("--model", cfg.model_path, "Model JSON")->required()->check(CLI::ExistingFile);
    fair->add_option("--utility", cfg.utility, "linear, log or alpha-fair")
        ->check(CLI::IsMember({"linear", "log", "alpha-fair"}));
    fair->add_option("--weights", cfg.weights, "Comma-separated weights for linear utility");
    fair->add_option("--eps", cfg.eps, "Shift of the log utility")->check(CLI::PositiveNumber);
    fair->add_option("--alpha", cfg.alpha_fair, "alpha-fair parameter (>= 0, != 1)");
    fair->add_option("--caps", cfg.caps, "Comma-separated per-queue caps (inf allowed)");
    fair->add_option("--tol", cfg.tol, "Frank-Wolfe gap tolerance")->check(CLI::PositiveNumber);
    fair->add_option("--max-iters", cfg.max_iters, "Iteration limit")->check(CLI::PositiveNumber);
    fair->add_option("--step", cfg.step, "line or fixed")->check(CLI::IsMember({"line", "fixed"}));
    fair->add_option("--out", cfg.out_path, "Output file (default stdout)");

    auto* oracle = app.add_subcommand("oracle-check", "Cross-check support values against brute force");
    oracle->add_option("--model", cfg.model_path, "Model JSON")->required()->check(CLI::ExistingFile);
    oracle->add_option("--out", cfg.out_path, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    cfg.subcommand = app.get_subcommands().front()->get_name();
    mqms::set_thread_count(cfg.threads);
    const Json config = describe(cfg);
    const std::string hash = config_hash(config);
    std::cerr << "config " << config.dump() << " threads=" << mqms::thread_count() << " hash=" << hash << '\n';

    try {
        if (cfg.subcommand == "vhat") return cmd_vhat(cfg, hash);
        if (cfg.subcommand == "region") return cmd_region(cfg, hash);
        if (cfg.subcommand == "check") return cmd_check(cfg, hash);
        if (cfg.subcommand == "simulate") return cmd_simulate(cfg, hash);
        if (cfg.subcommand == "delay-bound") return cmd_delay_bound(cfg, hash);
        if (cfg.subcommand == "fluid-boundary") return cmd_fluid_boundary(cfg, hash);
        if (cfg.subcommand == "fairness") return cmd_fairness(cfg, hash);
        if (cfg.subcommand == "oracle-check") return cmd_oracle_check(cfg, hash);
    } catch (const mqms::ModelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mqms::CapExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
