#include "mqms/fluid_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mqms/error.hpp"
#include "mqms/parallel.hpp"

namespace mqms {

namespace {

void check_alpha(std::span<const double> alpha, int queues) {
    if (alpha.size() != static_cast<std::size_t>(queues))
        throw ModelError("direction vector length does not match the number of queues");
    bool any = false;
    for (double a : alpha) {
        if (!(a >= 0.0)) throw ModelError("direction vector must be nonnegative");
        any = any || a > 0.0;
    }
    if (!any) throw ModelError("direction vector must not be zero");
}

double sample_value(std::span<const double> c, std::span<const double> alpha, int queues, int servers) {
    double v = 0.0;
    for (int k = 0; k < servers; ++k) {
        double best = 0.0;
        for (int n = 0; n < queues; ++n)
            best = std::max(best, alpha[static_cast<std::size_t>(n)] * c[static_cast<std::size_t>(n * servers + k)]);
        v += best;
    }
    return v;
}

McEstimate finish(double sum, double centered_ss, std::size_t samples) {
    const auto n = static_cast<double>(samples);
    McEstimate e;
    e.estimate = sum / n;
    e.std_error = samples > 1 ? std::sqrt(centered_ss / (n - 1.0) / n) : 0.0;
    return e;
}

// Sequential two-pass mean and std_error; used inside the parallel-over-directions loop.
McEstimate serial_estimate(const ChannelSampleBlock& block, std::span<const double> alpha) {
    double sum = 0.0;
    for (std::size_t s = 0; s < block.samples(); ++s)
        sum += sample_value(block.matrix(s), alpha, block.queues(), block.servers());
    const double mean = sum / static_cast<double>(block.samples());
    double ss = 0.0;
    for (std::size_t s = 0; s < block.samples(); ++s) {
        const double d = sample_value(block.matrix(s), alpha, block.queues(), block.servers()) - mean;
        ss += d * d;
    }
    return finish(sum, ss, block.samples());
}

}  // namespace

ChannelSampleBlock::ChannelSampleBlock(const ContinuousChannelModel& model, std::size_t samples, std::uint64_t seed)
    : queues_(model.queues),
      servers_(model.servers),
      samples_(samples),
      stride_(static_cast<std::size_t>(model.queues) * static_cast<std::size_t>(model.servers)) {
    if (samples == 0) throw ModelError("Monte Carlo needs at least one sample");
    validate(model);
    data_.resize(samples_ * stride_);
    Rng rng(seed);
    const auto links = model.links.cells();
    for (std::size_t s = 0; s < samples_; ++s)
        for (std::size_t l = 0; l < stride_; ++l) data_[s * stride_ + l] = sample(links[l], rng);
}

McEstimate mc_support_function(const ChannelSampleBlock& block, std::span<const double> alpha) {
    check_alpha(alpha, block.queues());
    auto value = [&](std::uint64_t s) {
        return sample_value(block.matrix(static_cast<std::size_t>(s)), alpha, block.queues(), block.servers());
    };
    const double sum = deterministic_sum(block.samples(), value);
    const double mean = sum / static_cast<double>(block.samples());
    const double ss = deterministic_sum(block.samples(), [&](std::uint64_t s) {
        const double d = value(s) - mean;
        return d * d;
    });
    return finish(sum, ss, block.samples());
}

McEstimate mc_support_function(const ContinuousChannelModel& model, std::span<const double> alpha,
                               std::size_t samples, std::uint64_t seed) {
    check_alpha(alpha, model.queues);
    return mc_support_function(ChannelSampleBlock(model, samples, seed), alpha);
}

namespace serial {

McEstimate mc_support_function(const ChannelSampleBlock& block, std::span<const double> alpha) {
    check_alpha(alpha, block.queues());
    return serial_estimate(block, alpha);
}

}  // namespace serial

double exp_2q_boundary(double mu1, double mu2, double lambda1) {
    if (!(mu1 > 0.0) || !(mu2 > 0.0)) throw ModelError("exponential means must be positive");
    if (lambda1 < 0.0) throw ModelError("lambda1 must be nonnegative");
    if (lambda1 > mu1) throw ModelError("outside single-queue capacity");
    const double s = std::sqrt(1.0 - lambda1 / mu1);
    return mu2 * s * (2.0 - s);
}

BoundaryCurve::BoundaryCurve(std::vector<SupportLine> lines, McEstimate lambda1_max, McEstimate lambda2_max,
                             std::size_t samples_per_direction, std::size_t grid_points)
    : lines_(std::move(lines)), lambda1_max_(lambda1_max), lambda2_max_(lambda2_max), samples_(samples_per_direction) {
    grid_points = std::max<std::size_t>(grid_points, 2);
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double l1 = lambda1_max_.estimate * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        CurvePoint p = at(l1);
        p.lambda2 = std::max(p.lambda2, 0.0);
        points_.push_back(p);
    }
    points_.push_back({lambda1_max_.estimate, 0.0, lambda1_max_.std_error});
}

CurvePoint BoundaryCurve::at(double lambda1) const {
    CurvePoint p{lambda1, lambda2_max_.estimate, lambda2_max_.std_error};
    if (lambda1 > lambda1_max_.estimate) {
        p.lambda2 = -std::numeric_limits<double>::infinity();
        p.std_error = lambda1_max_.std_error;
        return p;
    }
    for (const auto& line : lines_) {
        const double c = std::cos(line.theta);
        const double s = std::sin(line.theta);
        const double l2 = (line.h - lambda1 * c) / s;
        if (l2 < p.lambda2) {
            p.lambda2 = l2;
            p.std_error = line.std_error / s;
        }
    }
    return p;
}

BoundaryCurve boundary_trace(const ContinuousChannelModel& model, const TraceOptions& options) {
    if (model.queues != 2) throw ModelError("boundary tracing needs exactly two queues");
    if (options.directions < 3) throw ModelError("boundary tracing needs at least 3 directions");
    const ChannelSampleBlock block(model, options.samples, options.seed);

    const int d = options.directions;
    std::vector<SupportLine> lines(static_cast<std::size_t>(d));
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
    for (int i = 0; i < d; ++i) {
        const double theta = (i + 1) * (std::numbers::pi / 2.0) / (d + 1);
        const double alpha[2] = {std::cos(theta), std::sin(theta)};
        const McEstimate e = serial_estimate(block, alpha);
        lines[static_cast<std::size_t>(i)] = {theta, e.estimate, e.std_error};
    }

    const double e1[2] = {1.0, 0.0};
    const double e2[2] = {0.0, 1.0};
    return BoundaryCurve(std::move(lines), serial_estimate(block, e1), serial_estimate(block, e2), options.samples,
                         options.grid_points);
}

}  // namespace mqms
