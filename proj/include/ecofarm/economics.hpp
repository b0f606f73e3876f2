#pragma once

#include <optional>
#include <variant>

#include "ecofarm/queueing.hpp"

namespace ecofarm {

/// Watt-seconds per kWh.
inline constexpr double kJoulesPerKwh = 3.6e6;

struct EconomicModel {
    double reward_per_job = 0.0;      // money per served job
    double electricity_price = 0.0;   // money per kWh, flat
    double peak_power = 200.0;        // W per server at full utilization
    double idle_fraction = 0.65;      // share of peak drawn when idle
    std::optional<double> setup_power;  // W during boot; peak_power when unset
    double setup_duration = 0.0;      // s from off to serving
    double abandon_penalty = 0.0;     // money per abandoned job

    double setup_power_w() const noexcept { return setup_power.value_or(peak_power); }
};

void validate(const EconomicModel& econ);

namespace power_state {
struct Off {};
struct SettingUp {};
struct Active {
    double utilization = 0.0;
};
}  // namespace power_state

using ServerPowerState = std::variant<power_state::Off, power_state::SettingUp, power_state::Active>;

/// Instantaneous draw in watts. Active servers are energy-proportional:
/// linear from idle_fraction * peak at zero load up to peak.
double server_power(const ServerPowerState& state, const EconomicModel& econ);

/// Money charged for `watt_seconds` of energy.
double energy_cost(double watt_seconds, const EconomicModel& econ) noexcept;

/// Rewards minus abandonment penalties minus electricity, per second, with all
/// n servers active at the mean per-server utilization.
double net_revenue_rate(const QueueParams& params, const PerformanceMetrics& metrics,
                        const EconomicModel& econ);

}  // namespace ecofarm
