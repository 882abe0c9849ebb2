#include "mqms/fairness.hpp"

#include <algorithm>
#include <cmath>

#include "mqms/error.hpp"

namespace mqms {

namespace {

constexpr double kBindingSlack = 1e-7;
constexpr double kRegionTol = 1e-7;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool all_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void check_gradient(std::span<const double> g) {
    for (double x : g)
        if (!std::isfinite(x)) throw ModelError("non-finite utility gradient");
}

// Maximizer of a concave phi on [0, 1] by golden-section search.
double golden_section_max(const std::function<double(double)>& phi) {
    constexpr double kInvPhi = 0.6180339887498949;
    double lo = 0.0;
    double hi = 1.0;
    double c = hi - kInvPhi * (hi - lo);
    double d = lo + kInvPhi * (hi - lo);
    double fc = phi(c);
    double fd = phi(d);
    while (hi - lo > 1e-12) {
        if (fc >= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - kInvPhi * (hi - lo);
            fc = phi(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + kInvPhi * (hi - lo);
            fd = phi(d);
        }
    }
    // The bracket never reaches the endpoints exactly; compare against them.
    double best = 0.5 * (lo + hi);
    double best_f = phi(best);
    for (double edge : {0.0, 1.0}) {
        const double f = phi(edge);
        if (f > best_f) {
            best = edge;
            best_f = f;
        }
    }
    return best;
}

// Queues that no server can ever serve; their rate is pinned at 0.
std::vector<bool> dead_queues(const DiscreteChannelModel& model, const EnumerationCaps& caps) {
    const auto n_queues = static_cast<std::size_t>(model.queues);
    std::vector<bool> dead(n_queues);
    for (std::size_t n = 0; n < n_queues; ++n) {
        std::vector<double> e(n_queues, 0.0);
        e[n] = 1.0;
        dead[n] = support_function(model, e, caps) == 0.0;
    }
    return dead;
}

std::vector<double> live_gradient(const UtilitySpec& u, std::span<const double> r, const std::vector<bool>& dead) {
    auto g = u.gradient(r);
    for (std::size_t n = 0; n < g.size(); ++n)
        if (dead[n]) g[n] = 0.0;
    check_gradient(g);
    return g;
}

StabilityRegion checked_region(const DiscreteChannelModel& model, const EnumerationCaps& caps) {
    RegionOptions opts;
    opts.caps = caps;
    return build_region(model, opts);
}

}  // namespace

double value(const Utility& u, double r) {
    if (const auto* l = std::get_if<LinearUtility>(&u)) return l->weight * r;
    if (const auto* g = std::get_if<LogUtility>(&u)) return std::log(r + g->shift);
    const double a = std::get<AlphaFairUtility>(u).a;
    return std::pow(r, 1.0 - a) / (1.0 - a);
}

double derivative(const Utility& u, double r) {
    if (const auto* l = std::get_if<LinearUtility>(&u)) return l->weight;
    if (const auto* g = std::get_if<LogUtility>(&u)) return 1.0 / (r + g->shift);
    return std::pow(r, -std::get<AlphaFairUtility>(u).a);
}

UtilitySpec UtilitySpec::uniform(std::size_t queues, Utility u, double cap) {
    return UtilitySpec{std::vector<Utility>(queues, u), std::vector<double>(queues, cap)};
}

double UtilitySpec::objective(std::span<const double> r) const {
    double total = 0.0;
    for (std::size_t n = 0; n < utilities.size(); ++n) total += value(utilities[n], std::min(r[n], caps[n]));
    return total;
}

std::vector<double> UtilitySpec::gradient(std::span<const double> r) const {
    std::vector<double> g(utilities.size());
    for (std::size_t n = 0; n < utilities.size(); ++n) g[n] = r[n] < caps[n] ? derivative(utilities[n], r[n]) : 0.0;
    return g;
}

void validate(const UtilitySpec& utils) {
    if (utils.utilities.size() != utils.caps.size()) throw ModelError("utilities and caps differ in length");
    for (std::size_t n = 0; n < utils.utilities.size(); ++n) {
        const auto& u = utils.utilities[n];
        if (const auto* l = std::get_if<LinearUtility>(&u); l && !(l->weight >= 0.0))
            throw ModelError("linear utility weight must be nonnegative");
        if (const auto* g = std::get_if<LogUtility>(&u); g && !(g->shift > 0.0))
            throw ModelError("log utility shift must be positive");
        if (const auto* a = std::get_if<AlphaFairUtility>(&u); a && (!(a->a >= 0.0) || a->a == 1.0))
            throw ModelError("alpha-fair parameter must be >= 0 and != 1");
        if (!(utils.caps[n] >= 0.0)) throw ModelError("rate caps must be nonnegative");
    }
}

FairnessSolution solve_fairness(const DiscreteChannelModel& model, const UtilitySpec& utilities,
                                const FairnessOptions& options) {
    validate(utilities);
    if (utilities.utilities.size() != static_cast<std::size_t>(model.queues))
        throw ModelError("one utility per queue is required");
    if (!(options.tol > 0.0)) throw ModelError("tolerance must be positive");

    const auto n_queues = static_cast<std::size_t>(model.queues);
    std::vector<double> r(n_queues, 0.0);
    for (std::size_t n = 0; n < n_queues; ++n) {
        std::vector<double> e(n_queues, 0.0);
        e[n] = 1.0;
        const RatePoint v = support_vertex(model, e, TieRule::lowest_index, options.caps);
        for (std::size_t i = 0; i < n_queues; ++i) r[i] += v.rates[i] / static_cast<double>(n_queues);
    }

    const auto dead = dead_queues(model, options.caps);
    FairnessSolution sol;
    std::vector<double> direction(n_queues);
    std::vector<double> trial(n_queues);
    auto gap_at = [&](std::span<const double> point, std::vector<double>& grad, RatePoint& vertex) {
        grad = live_gradient(utilities, point, dead);
        if (all_zero(grad)) return 0.0;
        vertex = support_vertex(model, grad, TieRule::lowest_index, options.caps);
        double g = 0.0;
        for (std::size_t n = 0; n < n_queues; ++n) g += grad[n] * (vertex.rates[n] - point[n]);
        return g;
    };

    std::vector<double> grad;
    RatePoint vertex;
    double gap = gap_at(r, grad, vertex);
    int it = 0;
    while (gap > options.tol && it < options.max_iters) {
        for (std::size_t n = 0; n < n_queues; ++n) direction[n] = vertex.rates[n] - r[n];
        // Iterations are counted from 1, so a fixed step never jumps onto a vertex.
        double step = 2.0 / (it + 3.0);
        if (options.step == StepRule::line_search) {
            step = golden_section_max([&](double g) {
                for (std::size_t n = 0; n < n_queues; ++n) trial[n] = r[n] + g * direction[n];
                return utilities.objective(trial);
            });
        }
        for (std::size_t n = 0; n < n_queues; ++n) r[n] += step * direction[n];
        ++it;
        if (options.on_iteration) options.on_iteration(it, r, utilities.objective(r));
        gap = gap_at(r, grad, vertex);
    }

    sol.iterations = it;
    sol.gap = gap;
    sol.r_star.rates = r;
    for (std::size_t n = 0; n < n_queues; ++n)
        sol.r_star.rates[n] = std::clamp(r[n], 0.0, utilities.caps[n]);
    sol.objective = utilities.objective(sol.r_star.rates);

    sol.region = checked_region(model, options.caps);
    for (std::size_t i = 0; i < sol.region.inequalities.size(); ++i) {
        const auto& ineq = sol.region.inequalities[i];
        const auto alpha = ineq.alpha.as_real();
        const double slack = ineq.beta - dot(alpha, sol.r_star.rates);
        sol.slack.push_back(slack);
        if (slack <= kBindingSlack) sol.binding.push_back(i);
    }
    return sol;
}

double fw_gap(const DiscreteChannelModel& model, const RatePoint& r, const UtilitySpec& utilities,
              const EnumerationCaps& caps) {
    validate(utilities);
    if (r.size() != static_cast<std::size_t>(model.queues)) throw ModelError("rate vector length does not match N");
    if (membership_margin(checked_region(model, caps), r) < -kRegionTol) throw ModelError("rate point outside region");

    const auto grad = live_gradient(utilities, r.rates, dead_queues(model, caps));
    if (all_zero(grad)) return 0.0;
    const RatePoint v = support_vertex(model, grad, TieRule::lowest_index, caps);
    double g = 0.0;
    for (std::size_t n = 0; n < r.size(); ++n) g += grad[n] * (v.rates[n] - r.rates[n]);
    return g;
}

}  // namespace mqms
