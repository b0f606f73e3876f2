#include "ecofarm/economics.hpp"

#include <cmath>

#include "ecofarm/error.hpp"

namespace ecofarm {
namespace {

void require_non_negative(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0)
        fail(ErrorCode::InvalidParameter, std::string(name) + " must be finite and >= 0");
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

void validate(const EconomicModel& econ) {
    require_non_negative(econ.reward_per_job, "reward_per_job");
    require_non_negative(econ.electricity_price, "electricity_price");
    if (!std::isfinite(econ.peak_power) || econ.peak_power <= 0.0)
        fail(ErrorCode::InvalidParameter, "peak_power must be finite and > 0");
    if (!(econ.idle_fraction >= 0.0 && econ.idle_fraction <= 1.0))
        fail(ErrorCode::InvalidParameter, "idle_fraction must lie in [0, 1]");
    if (econ.setup_power) require_non_negative(*econ.setup_power, "setup_power");
    require_non_negative(econ.setup_duration, "setup_duration");
    require_non_negative(econ.abandon_penalty, "sla_penalty_per_abandon");
}

double server_power(const ServerPowerState& state, const EconomicModel& econ) {
    validate(econ);
    return std::visit(overloaded{
                          [](power_state::Off) { return 0.0; },
                          [&](power_state::SettingUp) { return econ.setup_power_w(); },
                          [&](power_state::Active a) {
                              if (!(a.utilization >= 0.0 && a.utilization <= 1.0))
                                  fail(ErrorCode::InvalidParameter, "utilization must lie in [0, 1]");
                              return econ.peak_power *
                                     (econ.idle_fraction + (1.0 - econ.idle_fraction) * a.utilization);
                          },
                      },
                      state);
}

double energy_cost(double watt_seconds, const EconomicModel& econ) noexcept {
    return econ.electricity_price * watt_seconds / kJoulesPerKwh;
}

double net_revenue_rate(const QueueParams& params, const PerformanceMetrics& metrics,
                        const EconomicModel& econ) {
    const double lambda = params.arrival_rate;
    const double served = lambda * (1.0 - metrics.p_abandon);
    const double abandoned = lambda * metrics.p_abandon;
    double watts = 0.0;
    if (params.servers > 0)
        watts = static_cast<double>(params.servers) *
                server_power(power_state::Active{metrics.utilization}, econ);
    return econ.reward_per_job * served - econ.abandon_penalty * abandoned - energy_cost(watts, econ);
}

}  // namespace ecofarm
