#pragma once

// Steady-state analysis of the M/M/n queue with exponentially impatient
// customers (Erlang-A). Only waiting jobs abandon; jobs in service always
// complete.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ecofarm {

struct QueueParams {
    double arrival_rate = 0.0;   // lambda, jobs/s
    double service_rate = 1.0;   // mu, per server, jobs/s
    double abandon_rate = 0.0;   // theta, per waiting job, 1/s
    std::int64_t servers = 0;    // n
};

struct SteadyStateDistribution {
    std::vector<double> probs;         // pi_0 .. pi_K
    std::size_t truncation_level = 0;  // K
};

struct PerformanceMetrics {
    double p_abandon = 0.0;
    double p_wait = 0.0;
    double mean_in_system = 0.0;
    double mean_queue = 0.0;
    double mean_wait_served = 0.0;  // seconds, conditional on being served
    double throughput = 0.0;
    double utilization = 0.0;
};

inline constexpr double kDefaultTruncationTolerance = 1e-12;

/// Throws Error{InvalidParameter} or Error{Unstable}.
void validate(const QueueParams& params);

/// True when the chain has a steady state.
bool is_stable(const QueueParams& params) noexcept;

/// Death rate of the birth-death chain at occupancy k.
double death_rate(const QueueParams& params, std::size_t k) noexcept;

/// Occupancy distribution, truncated adaptively so the omitted tail mass is
/// below `tolerance`. Normalization is anchored at the mode in log space, so
/// thousands of servers do not underflow.
SteadyStateDistribution steady_state(const QueueParams& params,
                                     double tolerance = kDefaultTruncationTolerance);

/// Same recursion with a caller-fixed truncation level K.
SteadyStateDistribution steady_state_truncated(const QueueParams& params, std::size_t level);

PerformanceMetrics performance_metrics(const QueueParams& params, const SteadyStateDistribution& dist);

/// steady_state followed by performance_metrics.
PerformanceMetrics analyze(const QueueParams& params,
                           double tolerance = kDefaultTruncationTolerance);

/// Classical Erlang-C probability of waiting (theta = 0 limit).
double erlang_c(double arrival_rate, double service_rate, std::int64_t servers);

}  // namespace ecofarm
