#pragma once

// Discrete-event simulation of an energy-aware server farm.
//
// Event ties at one instant resolve in the order completion, abandonment,
// setup-complete, policy-epoch, arrival, then by scheduling sequence.
// Arrivals, service times and patience draws come from separate streams so
// the arrival sample path does not depend on the policy under test.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "ecofarm/economics.hpp"
#include "ecofarm/policies.hpp"
#include "ecofarm/rng.hpp"
#include "ecofarm/trace.hpp"

namespace ecofarm {

struct SimConfig {
    double duration = 3600.0;
    double warmup = 0.0;  // excluded from all aggregate metrics
    std::uint64_t seed = 1;
    double mu = 1.0;
    double theta = 0.0;
    EconomicModel econ;
    std::int64_t initial_servers = 0;
};

void validate(const SimConfig& config);

struct StationaryWorkload {
    double rate = 0.0;
};

enum class ReplayMode {
    PiecewisePoisson,  // Poisson with rate count_i / bin_width inside bin i
    Exact,             // exactly count_i arrivals, uniform within bin i
};

struct TraceWorkload {
    std::shared_ptr<const ArrivalTrace> trace;
    ReplayMode mode = ReplayMode::PiecewisePoisson;
};

using WorkloadSpec = std::variant<StationaryWorkload, TraceWorkload>;

/// Lazily generated arrival instants in simulation time (0 = trace start).
class WorkloadSource {
public:
    WorkloadSource(WorkloadSpec spec, std::uint64_t seed);

    /// Next arrival time, or +infinity once the workload is exhausted.
    double next();

    /// Mean offered rate over [t0, t1).
    double true_rate(double t0, double t1) const;

    /// Time up to which arrivals are defined.
    double horizon() const noexcept;

    /// Bin width used when the simulator bins observed arrivals for the
    /// estimators; 0 means "use the policy epoch".
    double native_bin_width() const noexcept;

private:
    WorkloadSpec spec_;
    Rng rng_;
    double clock_ = 0.0;
    std::size_t bin_ = 0;
    std::vector<double> replay_;  // pending exact-replay instants, descending
};

WorkloadSource make_workload(const WorkloadSpec& spec, std::uint64_t seed);

enum class ServerState : std::uint8_t { Off, SettingUp, Idle, Busy };

const char* to_string(ServerState state) noexcept;

/// Hooks into a running simulation; every callback defaults to a no-op.
class SimObserver {
public:
    virtual ~SimObserver() = default;
    virtual void on_server_state(double /*time*/, std::size_t /*server*/, ServerState /*from*/,
                                 ServerState /*to*/) {}
    virtual void on_service_completion(double /*time*/, std::size_t /*server*/, ServerState /*state*/) {}
    virtual void on_finish(double /*time*/) {}
};

struct EnergyByState {
    std::array<double, 4> watt_hours{};  // indexed by ServerState

    double& operator[](ServerState s) noexcept { return watt_hours[static_cast<std::size_t>(s)]; }
    double operator[](ServerState s) const noexcept { return watt_hours[static_cast<std::size_t>(s)]; }
    double total() const noexcept { return watt_hours[0] + watt_hours[1] + watt_hours[2] + watt_hours[3]; }

    friend bool operator==(const EnergyByState&, const EnergyByState&) = default;
};

struct EpochRecord {
    double time = 0.0;
    std::int64_t n_target = 0;
    std::int64_t n_active = 0;  // Idle + Busy servers when the epoch opened
    double rate_estimate = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t abandoned = 0;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/// Aggregates cover jobs that arrive in [warmup, duration) and energy drawn
/// over the same window. Per-epoch rows cover the whole run.
struct SimResult {
    std::uint64_t arrivals = 0;
    std::uint64_t served = 0;
    std::uint64_t abandoned = 0;
    std::uint64_t in_system_at_end = 0;
    EnergyByState energy;
    double net_revenue = 0.0;
    double mean_wait_served = 0.0;
    double p_abandon = 0.0;        // abandoned / (served + abandoned)
    double mean_in_system = 0.0;   // time average
    double mean_sojourn = 0.0;     // over departed jobs, served or abandoned
    std::uint64_t scale_up_events = 0;
    std::uint64_t vetoed_scale_ups = 0;
    std::vector<EpochRecord> epochs;

    double energy_kwh() const noexcept { return energy.total() / 1000.0; }

    friend bool operator==(const SimResult&, const SimResult&) = default;
};

SimResult run(const SimConfig& config, const WorkloadSpec& workload, const PolicySpec& policy,
              SimObserver* observer = nullptr);

struct MetricSummary {
    double mean = 0.0;
    double half_width = 0.0;  // 95% Student-t
};

MetricSummary summarize_metric(const std::vector<double>& values);

struct ReplicationSummary {
    std::vector<SimResult> runs;  // in replication order
    MetricSummary arrivals;
    MetricSummary served;
    MetricSummary abandoned;
    MetricSummary p_abandon;
    MetricSummary energy_kwh;
    MetricSummary net_revenue;
    MetricSummary mean_wait_served;
};

ReplicationSummary summarize(std::vector<SimResult> runs);

/// Replication r runs with seed replication_seed(config.seed, r). Runs may
/// execute concurrently; results are merged in replication order.
ReplicationSummary run_replications(const SimConfig& config, const WorkloadSpec& workload,
                                    const PolicySpec& policy, std::size_t reps, bool parallel = true);

}  // namespace ecofarm
