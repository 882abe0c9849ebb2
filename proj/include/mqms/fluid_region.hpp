#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mqms/channel_model.hpp"

namespace mqms {

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(samples)
};

/// Channel matrices drawn once and shared by every direction (common random numbers).
class ChannelSampleBlock {
public:
    ChannelSampleBlock(const ContinuousChannelModel& model, std::size_t samples, std::uint64_t seed);

    int queues() const { return queues_; }
    int servers() const { return servers_; }
    std::size_t samples() const { return samples_; }
    // Row-major N x K matrix of sample s.
    std::span<const double> matrix(std::size_t s) const {
        return {data_.data() + s * stride_, stride_};
    }

private:
    int queues_;
    int servers_;
    std::size_t samples_;
    std::size_t stride_;
    std::vector<double> data_;
};

// Monte Carlo estimate of E[sum_k max_n alpha_n C_{n,k}] over a fixed sample block.
McEstimate mc_support_function(const ChannelSampleBlock& block, std::span<const double> alpha);
McEstimate mc_support_function(const ContinuousChannelModel& model, std::span<const double> alpha,
                               std::size_t samples, std::uint64_t seed);

namespace serial {

McEstimate mc_support_function(const ChannelSampleBlock& block, std::span<const double> alpha);

}  // namespace serial

// Two queues, one server, independent exponential links with means mu1 and mu2:
// the largest stable lambda2 for a given lambda1 in [0, mu1].
double exp_2q_boundary(double mu1, double mu2, double lambda1);

struct SupportLine {
    double theta = 0.0;
    double h = 0.0;  // support value in direction (cos theta, sin theta)
    double std_error = 0.0;
};

struct CurvePoint {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double std_error = 0.0;
};

/**
 * Upper stability boundary of a two-queue fluid system, traced as the lower
 * envelope of supporting lines cos(theta) l1 + sin(theta) l2 = h(theta) for
 * theta on an open first-quadrant grid, together with the axis constraints
 * l_n <= sum_k E[C_{n,k}].
 */
class BoundaryCurve {
public:
    BoundaryCurve(std::vector<SupportLine> lines, McEstimate lambda1_max, McEstimate lambda2_max,
                  std::size_t samples_per_direction, std::size_t grid_points);

    // Largest lambda2 with (lambda1, lambda2) inside every traced constraint; the
    // std_error is that of the active constraint. Negative lambda2 means lambda1 is
    // beyond the traced region.
    CurvePoint at(double lambda1) const;

    const std::vector<CurvePoint>& points() const { return points_; }
    const std::vector<SupportLine>& lines() const { return lines_; }
    McEstimate lambda1_max() const { return lambda1_max_; }
    McEstimate lambda2_max() const { return lambda2_max_; }
    std::size_t directions() const { return lines_.size(); }
    std::size_t samples_per_direction() const { return samples_; }

private:
    std::vector<SupportLine> lines_;
    McEstimate lambda1_max_;
    McEstimate lambda2_max_;
    std::size_t samples_;
    std::vector<CurvePoint> points_;
};

struct TraceOptions {
    int directions = 181;
    std::size_t samples = 100'000;
    std::uint64_t seed = 7;
    std::size_t grid_points = 201;  // lambda1 grid on [0, lambda1_max]; the curve ends with (lambda1_max, 0)
};

// theta_i = i * (pi/2) / (D + 1), i = 1..D. Directions are evaluated in parallel
// over one shared sample block.
BoundaryCurve boundary_trace(const ContinuousChannelModel& model, const TraceOptions& options = {});

}  // namespace mqms
