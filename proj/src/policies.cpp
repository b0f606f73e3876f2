#include "ecofarm/policies.hpp"

#include <cmath>
#include <limits>

#include "ecofarm/error.hpp"

namespace ecofarm {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_rates(double rate, double mu) {
    if (!(std::isfinite(rate) && rate >= 0.0)) fail(ErrorCode::InvalidParameter, "rate estimate must be >= 0");
    if (!(std::isfinite(mu) && mu > 0.0)) fail(ErrorCode::InvalidParameter, "service rate must be > 0");
}

}  // namespace

void validate(const PolicySpec& policy, const EconomicModel& econ) {
    validate(econ);
    validate(policy.estimator);
    if (!(std::isfinite(policy.epoch_length) && policy.epoch_length > 0.0))
        fail(ErrorCode::InvalidParameter, "epoch_length must be > 0");
    const bool dynamic = std::visit(overloaded{
                                        [](const StaticPolicy& s) {
                                            if (s.servers < 0)
                                                fail(ErrorCode::InvalidParameter, "static server count must be >= 0");
                                            return false;
                                        },
                                        [](const QedPolicy& q) {
                                            if (!(std::isfinite(q.beta) && q.beta >= 0.0))
                                                fail(ErrorCode::InvalidParameter, "qed beta must be >= 0");
                                            return true;
                                        },
                                        [](const AdaptivePolicy& a) {
                                            if (a.max_servers < 1)
                                                fail(ErrorCode::InvalidParameter, "adaptive n_max must be >= 1");
                                            return true;
                                        },
                                    },
                                    policy.kind);
    if (dynamic && policy.switching_guard && policy.epoch_length < econ.setup_duration)
        fail(ErrorCode::Config, "epoch_length must be >= setup_duration for a guarded dynamic policy");
}

std::string policy_kind_name(const PolicyKind& kind) {
    return std::visit(overloaded{
                          [](const StaticPolicy&) { return std::string("static"); },
                          [](const QedPolicy&) { return std::string("qed"); },
                          [](const AdaptivePolicy&) { return std::string("adaptive"); },
                      },
                      kind);
}

std::int64_t qed_staffing(double rate, double mu, double beta) {
    check_rates(rate, mu);
    if (!(std::isfinite(beta) && beta >= 0.0)) fail(ErrorCode::InvalidParameter, "beta must be >= 0");
    if (rate == 0.0) return 0;
    const double load = rate / mu;
    return static_cast<std::int64_t>(std::ceil(load + beta * std::sqrt(load)));
}

double predicted_revenue_rate(double rate, double mu, double theta, std::int64_t servers,
                              const EconomicModel& econ) {
    const QueueParams params{rate, mu, theta, servers};
    if (!is_stable(params)) return -std::numeric_limits<double>::infinity();
    return net_revenue_rate(params, analyze(params), econ);
}

StaffingChoice adaptive_staffing(double rate, double mu, double theta, const EconomicModel& econ,
                                 std::int64_t max_servers, bool early_exit) {
    check_rates(rate, mu);
    if (!(std::isfinite(theta) && theta >= 0.0)) fail(ErrorCode::InvalidParameter, "theta must be >= 0");
    if (max_servers < 1) fail(ErrorCode::InvalidParameter, "n_max must be >= 1");
    validate(econ);

    const auto patience = static_cast<std::int64_t>(std::ceil(3.0 * std::sqrt(static_cast<double>(max_servers))));
    StaffingChoice best{-1, -std::numeric_limits<double>::infinity()};
    double previous = -std::numeric_limits<double>::infinity();
    std::int64_t decreases = 0;
    for (std::int64_t n = 0; n <= max_servers; ++n) {
        if (!is_stable(QueueParams{rate, mu, theta, n})) continue;
        const double value = predicted_revenue_rate(rate, mu, theta, n, econ);
        if (best.target_servers < 0 || value > best.predicted_revenue_rate) best = {n, value};
        if (early_exit) {
            decreases = value < previous ? decreases + 1 : 0;
            if (decreases >= patience) break;
        }
        previous = value;
    }
    if (best.target_servers < 0)
        fail(ErrorCode::Unstable, "no server count in [0, n_max] gives a stable queue");
    return best;
}

double setup_energy_cost(std::int64_t added, const EconomicModel& econ) noexcept {
    if (added <= 0) return 0.0;
    return energy_cost(static_cast<double>(added) * econ.setup_power_w() * econ.setup_duration, econ);
}

StaffingDecision decide_with_estimate(const PolicySpec& policy, const RateEstimate& estimate,
                                      std::int64_t current_servers, double mu, double theta,
                                      const EconomicModel& econ) {
    if (current_servers < 0) fail(ErrorCode::InvalidParameter, "current server count must be >= 0");
    const double rate = estimate.rate;
    StaffingDecision d;
    d.estimate_used = estimate;
    bool guarded = policy.switching_guard;
    std::visit(overloaded{
                   [&](const StaticPolicy& s) {
                       d.target_servers = s.servers;
                       guarded = false;
                   },
                   [&](const QedPolicy& q) { d.target_servers = qed_staffing(rate, mu, q.beta); },
                   [&](const AdaptivePolicy& a) {
                       const auto choice = adaptive_staffing(rate, mu, theta, econ, a.max_servers, a.early_exit);
                       d.target_servers = choice.target_servers;
                   },
               },
               policy.kind);
    d.predicted_revenue_rate = predicted_revenue_rate(rate, mu, theta, d.target_servers, econ);

    if (guarded && d.target_servers > current_servers) {
        const double cost = setup_energy_cost(d.target_servers - current_servers, econ);
        if (cost > 0.0) {
            const double held = predicted_revenue_rate(rate, mu, theta, current_servers, econ);
            const double gain = (d.predicted_revenue_rate - held) * policy.epoch_length;
            if (!(gain > cost)) {
                d.target_servers = current_servers;
                d.predicted_revenue_rate = held;
                d.vetoed = true;
            }
        }
    }
    return d;
}

StaffingDecision decide(const PolicySpec& policy, TraceView history, std::int64_t current_servers,
                        double mu, double theta, const EconomicModel& econ, Horizon next_epoch) {
    return decide_with_estimate(policy, estimate(policy.estimator, history, next_epoch), current_servers, mu,
                                theta, econ);
}

}  // namespace ecofarm
