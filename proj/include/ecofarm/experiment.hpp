#pragma once

// Experiment files: JSON documents bundling a workload, service and
// economics parameters, simulation settings and one or more named policies.
// The schema is documented in docs/config.md.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecofarm/simulator.hpp"

namespace ecofarm {

struct NamedPolicy {
    std::string name;
    PolicySpec spec;
};

struct ExperimentConfig {
    WorkloadSpec workload = StationaryWorkload{};
    SimConfig sim;               // seed here is the base seed
    double epoch_length = 300.0; // default for policies that do not set one
    std::size_t reps = 1;
    std::vector<NamedPolicy> policies;
    std::filesystem::path output_dir;  // empty when the file names none
};

/// Parse and fully validate; relative trace paths resolve against `base_dir`.
/// Throws Error{Config} (or the trace loader's error) on any problem.
ExperimentConfig parse_experiment(std::string_view json_text, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);
void validate(const ExperimentConfig& config);

/// Economics block from a file holding either the bare fields or an
/// object with an "economics" member. Fields absent from the file keep the
/// values already in `base`.
EconomicModel load_economics(const std::filesystem::path& path, EconomicModel base = {});
EconomicModel parse_economics(std::string_view json_text, EconomicModel base = {});

/// The parts of a config file that the one-shot `analyze` and `staff`
/// commands read. Every block is optional here; absent fields stay unset.
struct Scenario {
    std::optional<double> arrival_rate;  // workload.rate
    std::optional<double> service_rate;  // service.mu
    std::optional<double> abandon_rate;  // service.theta
    std::optional<std::int64_t> servers; // analysis.servers
    std::optional<double> tolerance;     // analysis.tolerance
    std::optional<std::string> policy;   // staffing.policy
    std::optional<double> beta;          // staffing.beta
    std::optional<std::int64_t> max_servers;     // staffing.n_max
    std::optional<std::int64_t> static_servers;  // staffing.n
    EconomicModel economics;
};

Scenario load_scenario(const std::filesystem::path& path, EconomicModel base = {});
Scenario parse_scenario(std::string_view json_text, EconomicModel base = {});

struct PolicyOutcome {
    std::string name;
    ReplicationSummary summary;
};

struct ExperimentResults {
    std::uint64_t seed = 0;
    std::vector<PolicyOutcome> policies;
};

/// Run every policy (or only `policy_name`) for config.reps replications.
/// Replication r of every policy shares the same arrival sample path.
ExperimentResults run_experiment(const ExperimentConfig& config,
                                 std::optional<std::string> policy_name = std::nullopt);

/// `policy,served,abandoned,p_abandon,energy_kwh,net_revenue,ci_halfwidth`,
/// replication means; ci_halfwidth is the 95% half-width of net_revenue.
/// `significant_digits` 0 writes shortest round-trip representations.
std::string summary_csv(const ExperimentResults& results, int significant_digits = 0);

/// `time,n_target,n_active,rate_estimate,arrivals,abandoned`.
std::string series_csv(const SimResult& result);

std::string results_json(const ExperimentResults& results);

/// Writes summary.csv, results.json and series_<policy>_rep<r>.csv into
/// `dir`, creating it if needed.
void write_results(const ExperimentResults& results, const std::filesystem::path& dir);

}  // namespace ecofarm
