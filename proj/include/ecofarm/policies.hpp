#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "ecofarm/economics.hpp"
#include "ecofarm/estimators.hpp"

namespace ecofarm {

struct StaticPolicy {
    std::int64_t servers = 1;
};

/// Square-root staffing, n = ceil(R + beta * sqrt(R)) with R = rate / mu.
struct QedPolicy {
    double beta = 1.0;
};

/// Revenue-maximizing exhaustive search over [0, max_servers].
struct AdaptivePolicy {
    std::int64_t max_servers = 1000;
    bool early_exit = false;
};

using PolicyKind = std::variant<StaticPolicy, QedPolicy, AdaptivePolicy>;

struct PolicySpec {
    PolicyKind kind = StaticPolicy{};
    EstimatorSpec estimator = WindowEstimator{};
    double epoch_length = 300.0;
    bool switching_guard = true;
};

struct StaffingChoice {
    std::int64_t target_servers = 0;
    double predicted_revenue_rate = 0.0;
};

struct StaffingDecision {
    std::int64_t target_servers = 0;
    double predicted_revenue_rate = 0.0;
    RateEstimate estimate_used;
    bool vetoed = false;  // the switching guard held the current count
};

/// Throws InvalidParameter/Config for out-of-range fields, including an
/// epoch shorter than the setup time for a guarded dynamic policy.
void validate(const PolicySpec& policy, const EconomicModel& econ);

std::string policy_kind_name(const PolicyKind& kind);

std::int64_t qed_staffing(double rate, double mu, double beta);

/// Net revenue rate at n servers under the given load, or -infinity when the
/// queue has no steady state there (theta = 0 and rate >= n*mu).
double predicted_revenue_rate(double rate, double mu, double theta, std::int64_t servers,
                              const EconomicModel& econ);

/// Smallest maximizer of the net revenue rate over n in [0, max_servers].
/// With `early_exit` the scan stops after ceil(3*sqrt(max_servers))
/// consecutive decreases of the objective.
StaffingChoice adaptive_staffing(double rate, double mu, double theta, const EconomicModel& econ,
                                 std::int64_t max_servers, bool early_exit = false);

/// Setup energy cost of adding `added` servers.
double setup_energy_cost(std::int64_t added, const EconomicModel& econ) noexcept;

/// Forecast the next epoch from `history`, apply the policy, then let the
/// switching guard veto unprofitable scale-ups. Static policies are exempt
/// from the guard; scale-downs are never vetoed.
StaffingDecision decide(const PolicySpec& policy, TraceView history, std::int64_t current_servers,
                        double mu, double theta, const EconomicModel& econ, Horizon next_epoch);

/// Same, with an already computed rate estimate.
StaffingDecision decide_with_estimate(const PolicySpec& policy, const RateEstimate& estimate,
                                      std::int64_t current_servers, double mu, double theta,
                                      const EconomicModel& econ);

}  // namespace ecofarm
