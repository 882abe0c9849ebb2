#pragma once

#include <functional>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "mqms/capacity_region.hpp"
#include "mqms/channel_model.hpp"

namespace mqms {

/// f(r) = weight * r.
struct LinearUtility {
    double weight = 1.0;
};

/// f(r) = log(r + shift).
struct LogUtility {
    double shift = 1e-6;
};

/// f(r) = r^(1-a) / (1-a), a >= 0, a != 1.
struct AlphaFairUtility {
    double a = 0.5;
};

using Utility = std::variant<LinearUtility, LogUtility, AlphaFairUtility>;

double value(const Utility& u, double r);
double derivative(const Utility& u, double r);

/// Per-queue utilities and rate caps of the fairness program.
struct UtilitySpec {
    std::vector<Utility> utilities;
    std::vector<double> caps;  // +infinity for uncapped queues

    static UtilitySpec uniform(std::size_t queues, Utility u,
                               double cap = std::numeric_limits<double>::infinity());

    // sum_n f_n(min(r_n, cap_n))
    double objective(std::span<const double> r) const;
    // Right derivative: f_n'(r_n) below the cap, 0 at or above it.
    std::vector<double> gradient(std::span<const double> r) const;
};

void validate(const UtilitySpec& utils);

enum class StepRule { line_search, fixed };

struct FairnessOptions {
    double tol = 1e-6;
    int max_iters = 10'000;
    StepRule step = StepRule::line_search;
    EnumerationCaps caps;
    // Observed after every iteration with the iterate and its objective value.
    std::function<void(int, std::span<const double>, double)> on_iteration;
};

struct FairnessSolution {
    RatePoint r_star;
    double objective = 0.0;
    double gap = 0.0;
    int iterations = 0;
    std::vector<double> slack;              // beta - alpha . r per region inequality
    std::vector<std::size_t> binding;       // inequalities with slack <= 1e-7
    StabilityRegion region;
};

/**
 * Frank-Wolfe on g(r) = sum_n f_n(min(r_n, cap_n)) over the stability polytope.
 *
 * The linear maximization oracle is support_vertex with the gradient as the
 * direction (gradients are nonnegative). Starts from the average of the
 * single-queue vertices and stops when the Frank-Wolfe gap drops to tol.
 * The returned rate is clamped to the caps.
 */
FairnessSolution solve_fairness(const DiscreteChannelModel& model, const UtilitySpec& utilities,
                                const FairnessOptions& options = {});

// grad g(r) . (support_vertex(grad g(r)) - r); throws ModelError if r is outside the region.
double fw_gap(const DiscreteChannelModel& model, const RatePoint& r, const UtilitySpec& utilities,
              const EnumerationCaps& caps = {});

}  // namespace mqms
