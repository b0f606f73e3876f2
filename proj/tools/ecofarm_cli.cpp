// ecofarm command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecofarm.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int report(ecofarm_status status, int exit_code) {
    std::fprintf(stderr, "ecofarm: %s: %s\n", ecofarm_status_string(status), ecofarm_last_error());
    return exit_code;
}

int usage_error(const std::string& message) {
    std::fprintf(stderr, "ecofarm: %s\n", message.c_str());
    return kExitUsage;
}

void print_value(const char* key, double value) { std::printf("%s: %.6g\n", key, value); }

template <class T>
void override_with(const std::optional<T>& flag, int& has, T& value) {
    if (flag) {
        has = 1;
        value = *flag;
    }
}

struct AnalyzeArgs {
    std::optional<double> lambda, mu, theta, tolerance;
    std::optional<std::int64_t> servers;
    std::string config;
};

struct EconFlags {
    std::string econ_file;
    std::optional<double> reward, price, peak, idle, setup_power, setup_duration, penalty;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--econ", econ_file, "JSON economics file")->check(CLI::ExistingFile);
        cmd->add_option("--reward", reward, "reward per served job");
        cmd->add_option("--price", price, "electricity price per kWh");
        cmd->add_option("--p-peak", peak, "peak power per server (W)");
        cmd->add_option("--idle-fraction", idle, "idle power as a fraction of peak");
        cmd->add_option("--p-setup", setup_power, "power while booting (W)");
        cmd->add_option("--setup-duration", setup_duration, "boot time (s)");
        cmd->add_option("--penalty", penalty, "penalty per abandoned job");
    }

    void apply(ecofarm_economics& e) const {
        if (reward) e.reward_per_job = *reward;
        if (price) e.electricity_price = *price;
        if (peak) e.peak_power = *peak;
        if (idle) e.idle_fraction = *idle;
        if (setup_power) e.setup_power = *setup_power;
        if (setup_duration) e.setup_duration = *setup_duration;
        if (penalty) e.abandon_penalty = *penalty;
    }
};

struct StaffArgs {
    std::string policy;
    std::optional<double> lambda, mu, theta, beta;
    std::optional<std::int64_t> n_max, n;
    std::string config;
    EconFlags econ;
};

struct RunArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::string policy;
    std::string out;
};

struct EstimateArgs {
    std::string trace, log, config;
    std::optional<double> bin_width;
    std::vector<std::string> estimators;
    bool forecast = false;
};

struct SynthArgs {
    std::string out;
    double base = 100.0, amplitude = 50.0, period = 86400.0, bin_width = 300.0;
    std::size_t bins = 288;
    std::optional<std::uint64_t> seed;
};

int load_scenario(const std::string& path, ecofarm_scenario& s) {
    ecofarm_scenario_init(&s);
    if (path.empty()) return 0;
    if (auto st = ecofarm_scenario_load(path.c_str(), &s); st != ECOFARM_OK) return report(st, kExitUsage);
    return 0;
}

int cmd_analyze(const AnalyzeArgs& a) {
    ecofarm_scenario s;
    if (int rc = load_scenario(a.config, s)) return rc;
    override_with(a.lambda, s.has_arrival_rate, s.arrival_rate);
    override_with(a.mu, s.has_service_rate, s.service_rate);
    override_with(a.theta, s.has_abandon_rate, s.abandon_rate);
    override_with(a.servers, s.has_servers, s.servers);
    override_with(a.tolerance, s.has_tolerance, s.tolerance);
    if (!s.has_arrival_rate) return usage_error("analyze needs --lambda");
    if (!s.has_service_rate) return usage_error("analyze needs --mu");
    if (!s.has_servers) return usage_error("analyze needs --servers");

    const ecofarm_queue_params p{s.arrival_rate, s.service_rate, s.has_abandon_rate ? s.abandon_rate : 0.0,
                                 s.servers};
    ecofarm_metrics m;
    if (auto st = ecofarm_analyze(&p, s.has_tolerance ? s.tolerance : 0.0, &m); st != ECOFARM_OK)
        return report(st, kExitUsage);
    print_value("p_abandon", m.p_abandon);
    print_value("p_wait", m.p_wait);
    print_value("mean_in_system", m.mean_in_system);
    print_value("mean_queue", m.mean_queue);
    print_value("mean_wait_served", m.mean_wait_served);
    print_value("throughput", m.throughput);
    print_value("utilization", m.utilization);
    return 0;
}

int cmd_staff(const StaffArgs& a) {
    ecofarm_scenario s;
    if (int rc = load_scenario(a.config, s)) return rc;
    if (!a.econ.econ_file.empty())
        if (auto st = ecofarm_economics_load(a.econ.econ_file.c_str(), &s.economics); st != ECOFARM_OK)
            return report(st, kExitUsage);
    a.econ.apply(s.economics);
    override_with(a.lambda, s.has_arrival_rate, s.arrival_rate);
    override_with(a.mu, s.has_service_rate, s.service_rate);
    override_with(a.theta, s.has_abandon_rate, s.abandon_rate);
    override_with(a.beta, s.has_beta, s.beta);
    override_with(a.n_max, s.has_max_servers, s.max_servers);
    override_with(a.n, s.has_static_servers, s.static_servers);

    const std::string policy = a.policy.empty() ? std::string(s.policy) : a.policy;
    if (policy.empty()) return usage_error("staff needs --policy static|qed|adaptive");
    if (!s.has_arrival_rate) return usage_error("staff needs --lambda");
    if (!s.has_service_rate) return usage_error("staff needs --mu");
    const double theta = s.has_abandon_rate ? s.abandon_rate : 0.0;

    ecofarm_staffing out;
    ecofarm_status st;
    if (policy == "qed") {
        st = ecofarm_staff_qed(s.arrival_rate, s.service_rate, s.has_beta ? s.beta : 1.0, &s.economics, theta, &out);
    } else if (policy == "adaptive") {
        st = ecofarm_staff_adaptive(s.arrival_rate, s.service_rate, theta, &s.economics,
                                    s.has_max_servers ? s.max_servers : 1000, &out);
    } else if (policy == "static") {
        if (!s.has_static_servers) return usage_error("static staffing needs --n");
        st = ecofarm_staff_static(s.static_servers, s.arrival_rate, s.service_rate, theta, &s.economics, &out);
    } else {
        return usage_error("unknown policy '" + policy + "' (expected static, qed or adaptive)");
    }
    if (st != ECOFARM_OK) return report(st, kExitUsage);
    std::printf("target_n: %lld\n", static_cast<long long>(out.target_servers));
    print_value("predicted_revenue_rate", out.predicted_revenue_rate);
    return 0;
}

int cmd_run(const RunArgs& a, bool compare) {
    ecofarm_experiment* exp = nullptr;
    if (auto st = ecofarm_experiment_load(a.config.c_str(), &exp); st != ECOFARM_OK) return report(st, kExitUsage);
    std::unique_ptr<ecofarm_experiment, decltype(&ecofarm_experiment_free)> exp_guard(exp, ecofarm_experiment_free);

    if (a.seed) ecofarm_experiment_set_seed(exp, *a.seed);
    if (a.reps)
        if (auto st = ecofarm_experiment_set_reps(exp, *a.reps); st != ECOFARM_OK) return report(st, kExitUsage);

    const char* only = nullptr;
    std::string selected;
    if (!compare) {
        selected = a.policy.empty() ? ecofarm_experiment_policy_name(exp, 0) : a.policy;
        only = selected.c_str();
        bool known = false;
        for (std::size_t i = 0; i < ecofarm_experiment_policy_count(exp); ++i)
            known = known || selected == ecofarm_experiment_policy_name(exp, i);
        if (!known) return usage_error("no policy named '" + selected + "' in " + a.config);
    }

    ecofarm_results* res = nullptr;
    if (auto st = ecofarm_experiment_run(exp, only, &res); st != ECOFARM_OK) return report(st, kExitRuntime);
    std::unique_ptr<ecofarm_results, decltype(&ecofarm_results_free)> res_guard(res, ecofarm_results_free);

    const std::string out = a.out.empty() ? ecofarm_experiment_output_dir(exp) : a.out;
    if (!out.empty())
        if (auto st = ecofarm_results_write(res, out.c_str()); st != ECOFARM_OK) return report(st, kExitRuntime);
    std::fputs(ecofarm_results_summary(res, 6), stdout);
    return 0;
}

int cmd_estimate(const EstimateArgs& a) {
    const int sources = !a.trace.empty() + !a.log.empty() + !a.config.empty();
    if (sources != 1) return usage_error("estimate needs exactly one of --trace, --log or --config");

    ecofarm_trace* trace = nullptr;
    std::vector<std::string> estimators = a.estimators;
    ecofarm_status st = ECOFARM_OK;
    if (!a.trace.empty()) {
        st = ecofarm_trace_load_binned(a.trace.c_str(), &trace);
    } else if (!a.log.empty()) {
        if (!a.bin_width) return usage_error("--log needs --bin-width");
        st = ecofarm_trace_aggregate_log(a.log.c_str(), *a.bin_width, &trace);
    } else {
        ecofarm_experiment* exp = nullptr;
        st = ecofarm_experiment_load(a.config.c_str(), &exp);
        if (st == ECOFARM_OK) {
            st = ecofarm_experiment_trace(exp, &trace);
            if (estimators.empty())
                for (std::size_t i = 0; i < ecofarm_experiment_policy_count(exp); ++i)
                    estimators.emplace_back(ecofarm_experiment_policy_estimator(exp, i));
            ecofarm_experiment_free(exp);
        }
    }
    if (st != ECOFARM_OK) return report(st, kExitUsage);
    std::unique_ptr<ecofarm_trace, decltype(&ecofarm_trace_free)> guard(trace, ecofarm_trace_free);
    if (estimators.empty()) estimators = {"window:5", "ewma:0.3", "trend:5", "margin:1:window:5"};

    if (a.forecast) {
        std::printf("estimator,forecast_rate\n");
        for (const auto& e : estimators) {
            double rate = 0.0;
            if (auto s = ecofarm_estimator_forecast(trace, e.c_str(), &rate); s != ECOFARM_OK)
                return report(s, kExitUsage);
            std::printf("%s,%.6g\n", e.c_str(), rate);
        }
        return 0;
    }
    std::printf("estimator,scored_bins,mape_percent,rmse,mean_bias\n");
    for (const auto& e : estimators) {
        ecofarm_estimator_report r;
        if (auto s = ecofarm_estimator_evaluate(trace, e.c_str(), &r); s != ECOFARM_OK) return report(s, kExitUsage);
        std::printf("%s,%zu,%.6g,%.6g,%.6g\n", e.c_str(), r.scored_bins, r.mape_percent, r.rmse, r.mean_bias);
    }
    return 0;
}

int cmd_synth(const SynthArgs& a) {
    ecofarm_trace* trace = nullptr;
    if (auto st = ecofarm_trace_synthesize_diurnal(a.base, a.amplitude, a.period, a.bin_width, a.bins,
                                                   a.seed.has_value(), a.seed.value_or(0), &trace);
        st != ECOFARM_OK)
        return report(st, kExitUsage);
    std::unique_ptr<ecofarm_trace, decltype(&ecofarm_trace_free)> guard(trace, ecofarm_trace_free);
    if (auto st = ecofarm_trace_save_binned(trace, a.out.c_str()); st != ECOFARM_OK) return report(st, kExitRuntime);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Capacity planning for energy-aware server farms"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ecofarm_version()));

    AnalyzeArgs analyze;
    auto* c_analyze = app.add_subcommand("analyze", "Erlang-A steady-state metrics");
    c_analyze->add_option("--lambda", analyze.lambda, "arrival rate (jobs/s)");
    c_analyze->add_option("--mu", analyze.mu, "service rate per server (jobs/s)");
    c_analyze->add_option("--theta", analyze.theta, "abandonment rate of waiting jobs (1/s)");
    c_analyze->add_option("--servers", analyze.servers, "number of active servers");
    c_analyze->add_option("--tolerance", analyze.tolerance, "truncation tolerance, in (0, 1e-6]");
    c_analyze->add_option("--config", analyze.config, "JSON file supplying any of the above")->check(CLI::ExistingFile);

    StaffArgs staff;
    auto* c_staff = app.add_subcommand("staff", "recommend a server count");
    c_staff->add_option("--policy", staff.policy, "static, qed or adaptive");
    c_staff->add_option("--lambda", staff.lambda, "estimated arrival rate (jobs/s)");
    c_staff->add_option("--mu", staff.mu, "service rate per server (jobs/s)");
    c_staff->add_option("--theta", staff.theta, "abandonment rate (1/s)");
    c_staff->add_option("--beta", staff.beta, "QED safety factor (default 1)");
    c_staff->add_option("--n-max", staff.n_max, "adaptive search bound (default 1000)");
    c_staff->add_option("--n", staff.n, "server count for the static policy");
    c_staff->add_option("--config", staff.config, "JSON file supplying any of the above")->check(CLI::ExistingFile);
    staff.econ.add_to(c_staff);

    RunArgs sim_args;
    auto* c_sim = app.add_subcommand("simulate", "simulate one policy from an experiment file");
    c_sim->add_option("--config", sim_args.config, "experiment file")->required()->check(CLI::ExistingFile);
    c_sim->add_option("--seed", sim_args.seed, "base seed (overrides simulation.seed)");
    c_sim->add_option("--reps", sim_args.reps, "replications (overrides simulation.reps)");
    c_sim->add_option("--policy", sim_args.policy, "policy name (default: the first one)");
    c_sim->add_option("--out", sim_args.out, "output directory (overrides output.dir)");

    RunArgs cmp_args;
    auto* c_cmp = app.add_subcommand("compare", "simulate every policy on common arrival paths");
    c_cmp->add_option("--config", cmp_args.config, "experiment file")->required()->check(CLI::ExistingFile);
    c_cmp->add_option("--seed", cmp_args.seed, "base seed (overrides simulation.seed)");
    c_cmp->add_option("--reps", cmp_args.reps, "replications (overrides simulation.reps)");
    c_cmp->add_option("--out", cmp_args.out, "output directory (overrides output.dir)");

    EstimateArgs est;
    auto* c_est = app.add_subcommand("estimate", "walk-forward evaluation of rate estimators");
    c_est->add_option("--trace", est.trace, "binned CSV trace")->check(CLI::ExistingFile);
    c_est->add_option("--log", est.log, "raw log, one epoch-ms timestamp per line")->check(CLI::ExistingFile);
    c_est->add_option("--bin-width", est.bin_width, "bin width in seconds for --log");
    c_est->add_option("--config", est.config, "experiment file with a trace workload")->check(CLI::ExistingFile);
    c_est->add_option("--estimator", est.estimators, "estimator spec, repeatable (e.g. trend:5)");
    c_est->add_flag("--forecast", est.forecast, "print the next-bin forecast instead of error scores");

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "write a synthetic diurnal trace");
    c_synth->add_option("--out", synth.out, "output CSV path")->required();
    c_synth->add_option("--base", synth.base, "mean rate (jobs/s)");
    c_synth->add_option("--amplitude", synth.amplitude, "sinusoid amplitude (jobs/s)");
    c_synth->add_option("--period", synth.period, "period (s)");
    c_synth->add_option("--bin-width", synth.bin_width, "bin width (s)");
    c_synth->add_option("--bins", synth.bins, "number of bins");
    c_synth->add_option("--seed", synth.seed, "add Poisson noise with this seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (c_analyze->parsed()) return cmd_analyze(analyze);
    if (c_staff->parsed()) return cmd_staff(staff);
    if (c_sim->parsed()) return cmd_run(sim_args, false);
    if (c_cmp->parsed()) return cmd_run(cmp_args, true);
    if (c_est->parsed()) return cmd_estimate(est);
    if (c_synth->parsed()) return cmd_synth(synth);
    return kExitUsage;
}
