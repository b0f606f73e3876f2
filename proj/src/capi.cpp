#include "ecofarm.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <cstring>
#include <string>
#include <vector>

#include "ecofarm/error.hpp"
#include "ecofarm/experiment.hpp"
#include "ecofarm/policies.hpp"
#include "ecofarm/queueing.hpp"
#include "ecofarm/trace_io.hpp"

struct ecofarm_trace {
    ecofarm::ArrivalTrace trace;
};

struct ecofarm_experiment {
    ecofarm::ExperimentConfig config;
    std::vector<std::string> estimators;
    std::string output_dir;
};

struct ecofarm_results {
    ecofarm::ExperimentResults results;
    std::string summary;
};

namespace {

thread_local std::string g_last_error;

ecofarm_status to_status(ecofarm::ErrorCode code) {
    using ecofarm::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidParameter: return ECOFARM_INVALID_PARAMETER;
        case ErrorCode::Unstable: return ECOFARM_UNSTABLE;
        case ErrorCode::Mismatch: return ECOFARM_MISMATCH;
        case ErrorCode::InsufficientHistory: return ECOFARM_INSUFFICIENT_HISTORY;
        case ErrorCode::EmptyTrace: return ECOFARM_EMPTY_TRACE;
        case ErrorCode::Parse: return ECOFARM_PARSE_ERROR;
        case ErrorCode::NonUniformBinning: return ECOFARM_NON_UNIFORM_BINNING;
        case ErrorCode::NegativeCount: return ECOFARM_NEGATIVE_COUNT;
        case ErrorCode::Io: return ECOFARM_IO_ERROR;
        case ErrorCode::Config: return ECOFARM_CONFIG_ERROR;
        case ErrorCode::WorkloadExhausted: return ECOFARM_WORKLOAD_EXHAUSTED;
    }
    return ECOFARM_INTERNAL_ERROR;
}

template <class F>
ecofarm_status guarded(F&& body) noexcept {
    try {
        body();
        return ECOFARM_OK;
    } catch (const ecofarm::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return ECOFARM_INTERNAL_ERROR;
    } catch (...) {
        g_last_error = "unknown exception";
        return ECOFARM_INTERNAL_ERROR;
    }
}

void require(const void* p, const char* what) {
    if (!p) ecofarm::fail(ecofarm::ErrorCode::InvalidParameter, std::string(what) + " must not be NULL");
}

ecofarm::QueueParams to_cpp(const ecofarm_queue_params& p) {
    return {p.arrival_rate, p.service_rate, p.abandon_rate, p.servers};
}

ecofarm::EconomicModel to_cpp(const ecofarm_economics& e) {
    ecofarm::EconomicModel m;
    m.reward_per_job = e.reward_per_job;
    m.electricity_price = e.electricity_price;
    m.peak_power = e.peak_power;
    m.idle_fraction = e.idle_fraction;
    if (e.setup_power >= 0.0) m.setup_power = e.setup_power;
    m.setup_duration = e.setup_duration;
    m.abandon_penalty = e.abandon_penalty;
    return m;
}

ecofarm_economics to_c(const ecofarm::EconomicModel& m) {
    return {m.reward_per_job, m.electricity_price, m.peak_power, m.idle_fraction,
            m.setup_power.value_or(-1.0), m.setup_duration, m.abandon_penalty};
}

ecofarm::EconomicModel econ_or_default(const ecofarm_economics* econ) {
    return econ ? to_cpp(*econ) : ecofarm::EconomicModel{};
}

}  // namespace

extern "C" {

const char* ecofarm_last_error(void) { return g_last_error.c_str(); }

const char* ecofarm_status_string(ecofarm_status status) {
    switch (status) {
        case ECOFARM_OK: return "ok";
        case ECOFARM_INVALID_PARAMETER: return "invalid parameter";
        case ECOFARM_UNSTABLE: return "unstable instance";
        case ECOFARM_MISMATCH: return "mismatch";
        case ECOFARM_INSUFFICIENT_HISTORY: return "insufficient history";
        case ECOFARM_EMPTY_TRACE: return "empty trace";
        case ECOFARM_PARSE_ERROR: return "parse error";
        case ECOFARM_NON_UNIFORM_BINNING: return "non-uniform binning";
        case ECOFARM_NEGATIVE_COUNT: return "negative count";
        case ECOFARM_IO_ERROR: return "i/o error";
        case ECOFARM_CONFIG_ERROR: return "configuration error";
        case ECOFARM_WORKLOAD_EXHAUSTED: return "workload exhausted";
        case ECOFARM_INTERNAL_ERROR: return "internal error";
    }
    return "unknown status";
}

const char* ecofarm_version(void) { return "0.1.0"; }

ecofarm_status ecofarm_analyze(const ecofarm_queue_params* params, double tolerance, ecofarm_metrics* out) {
    return guarded([&] {
        require(params, "params");
        require(out, "out");
        const double tol = tolerance > 0.0 ? tolerance : ecofarm::kDefaultTruncationTolerance;
        const auto m = ecofarm::analyze(to_cpp(*params), tol);
        *out = {m.p_abandon, m.p_wait, m.mean_in_system, m.mean_queue, m.mean_wait_served, m.throughput,
                m.utilization};
    });
}

ecofarm_status ecofarm_steady_state(const ecofarm_queue_params* params, double tolerance, double* probs,
                                    size_t capacity, size_t* length) {
    return guarded([&] {
        require(params, "params");
        require(length, "length");
        if (capacity > 0) require(probs, "probs");
        const double tol = tolerance > 0.0 ? tolerance : ecofarm::kDefaultTruncationTolerance;
        const auto dist = ecofarm::steady_state(to_cpp(*params), tol);
        *length = dist.probs.size();
        std::copy_n(dist.probs.begin(), std::min(capacity, dist.probs.size()), probs);
    });
}

ecofarm_status ecofarm_erlang_c(double arrival_rate, double service_rate, int64_t servers, double* p_wait) {
    return guarded([&] {
        require(p_wait, "p_wait");
        *p_wait = ecofarm::erlang_c(arrival_rate, service_rate, servers);
    });
}

void ecofarm_economics_defaults(ecofarm_economics* out) {
    if (out) *out = to_c(ecofarm::EconomicModel{});
}

ecofarm_status ecofarm_economics_load(const char* path, ecofarm_economics* econ) {
    return guarded([&] {
        require(path, "path");
        require(econ, "econ");
        *econ = to_c(ecofarm::load_economics(path, to_cpp(*econ)));
    });
}

ecofarm_status ecofarm_net_revenue_rate(const ecofarm_queue_params* params, const ecofarm_economics* econ,
                                        double* out) {
    return guarded([&] {
        require(params, "params");
        require(econ, "econ");
        require(out, "out");
        const auto p = to_cpp(*params);
        const auto e = to_cpp(*econ);
        ecofarm::validate(e);
        *out = ecofarm::net_revenue_rate(p, ecofarm::analyze(p), e);
    });
}

ecofarm_status ecofarm_staff_qed(double rate, double service_rate, double beta, const ecofarm_economics* econ,
                                 double abandon_rate, ecofarm_staffing* out) {
    return guarded([&] {
        require(out, "out");
        const auto n = ecofarm::qed_staffing(rate, service_rate, beta);
        const auto e = econ_or_default(econ);
        ecofarm::validate(e);
        *out = {n, ecofarm::predicted_revenue_rate(rate, service_rate, abandon_rate, n, e)};
    });
}

ecofarm_status ecofarm_staff_adaptive(double rate, double service_rate, double abandon_rate,
                                      const ecofarm_economics* econ, int64_t max_servers, ecofarm_staffing* out) {
    return guarded([&] {
        require(econ, "econ");
        require(out, "out");
        const auto c = ecofarm::adaptive_staffing(rate, service_rate, abandon_rate, to_cpp(*econ), max_servers);
        *out = {c.target_servers, c.predicted_revenue_rate};
    });
}

ecofarm_status ecofarm_staff_static(int64_t servers, double rate, double service_rate, double abandon_rate,
                                    const ecofarm_economics* econ, ecofarm_staffing* out) {
    return guarded([&] {
        require(out, "out");
        if (servers < 0) ecofarm::fail(ecofarm::ErrorCode::InvalidParameter, "server count must be >= 0");
        if (!(rate >= 0.0 && service_rate > 0.0))
            ecofarm::fail(ecofarm::ErrorCode::InvalidParameter, "rates must be non-negative, mu > 0");
        const auto e = econ_or_default(econ);
        ecofarm::validate(e);
        *out = {servers, ecofarm::predicted_revenue_rate(rate, service_rate, abandon_rate, servers, e)};
    });
}

ecofarm_status ecofarm_trace_load_binned(const char* path, ecofarm_trace** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new ecofarm_trace{ecofarm::load_binned(path)};
    });
}

ecofarm_status ecofarm_trace_aggregate_log(const char* path, double bin_width, ecofarm_trace** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new ecofarm_trace{ecofarm::aggregate_log(std::filesystem::path(path), bin_width)};
    });
}

ecofarm_status ecofarm_trace_synthesize_diurnal(double base_rate, double amplitude, double period, double bin_width,
                                                size_t bins, int use_noise, uint64_t noise_seed,
                                                ecofarm_trace** out) {
    return guarded([&] {
        require(out, "out");
        const ecofarm::DiurnalShape shape{base_rate, amplitude, period, 0.0};
        std::optional<std::uint64_t> seed;
        if (use_noise) seed = noise_seed;
        *out = new ecofarm_trace{ecofarm::synthesize_diurnal(shape, bin_width, bins, seed)};
    });
}

ecofarm_status ecofarm_trace_save_binned(const ecofarm_trace* trace, const char* path) {
    return guarded([&] {
        require(trace, "trace");
        require(path, "path");
        ecofarm::save_binned(trace->trace, path);
    });
}

size_t ecofarm_trace_bins(const ecofarm_trace* trace) { return trace ? trace->trace.size() : 0; }
double ecofarm_trace_bin_width(const ecofarm_trace* trace) { return trace ? trace->trace.bin_width() : 0.0; }
double ecofarm_trace_start_time(const ecofarm_trace* trace) { return trace ? trace->trace.start_time() : 0.0; }

uint64_t ecofarm_trace_count(const ecofarm_trace* trace, size_t bin) {
    if (!trace || bin >= trace->trace.size()) return 0;
    return trace->trace.counts()[bin];
}

void ecofarm_trace_free(ecofarm_trace* trace) { delete trace; }

ecofarm_status ecofarm_estimator_evaluate(const ecofarm_trace* trace, const char* estimator,
                                          ecofarm_estimator_report* out) {
    return guarded([&] {
        require(trace, "trace");
        require(estimator, "estimator");
        require(out, "out");
        const auto r = ecofarm::evaluate_estimator(ecofarm::parse_estimator(estimator), trace->trace.view());
        *out = {r.scored_bins, r.warmup_bins, r.mape_percent, r.rmse, r.mean_bias};
    });
}

ecofarm_status ecofarm_estimator_forecast(const ecofarm_trace* trace, const char* estimator, double* rate) {
    return guarded([&] {
        require(trace, "trace");
        require(estimator, "estimator");
        require(rate, "rate");
        const auto& t = trace->trace;
        const ecofarm::Horizon next{t.end_time(), t.end_time() + t.bin_width()};
        *rate = ecofarm::estimate(ecofarm::parse_estimator(estimator), t.view(), next).rate;
    });
}

void ecofarm_scenario_init(ecofarm_scenario* out) {
    if (!out) return;
    *out = ecofarm_scenario{};
    out->economics = to_c(ecofarm::EconomicModel{});
}

ecofarm_status ecofarm_scenario_load(const char* path, ecofarm_scenario* scenario) {
    return guarded([&] {
        require(path, "path");
        require(scenario, "scenario");
        const auto s = ecofarm::load_scenario(path, to_cpp(scenario->economics));
        ecofarm_scenario out = *scenario;
        const auto take = [](const auto& opt, int& has, auto& value) {
            if (opt) {
                has = 1;
                value = *opt;
            }
        };
        take(s.arrival_rate, out.has_arrival_rate, out.arrival_rate);
        take(s.service_rate, out.has_service_rate, out.service_rate);
        take(s.abandon_rate, out.has_abandon_rate, out.abandon_rate);
        take(s.servers, out.has_servers, out.servers);
        take(s.tolerance, out.has_tolerance, out.tolerance);
        take(s.beta, out.has_beta, out.beta);
        take(s.max_servers, out.has_max_servers, out.max_servers);
        take(s.static_servers, out.has_static_servers, out.static_servers);
        if (s.policy) {
            if (s.policy->size() >= sizeof out.policy)
                ecofarm::fail(ecofarm::ErrorCode::Config, "staffing.policy is too long");
            std::memset(out.policy, 0, sizeof out.policy);
            std::memcpy(out.policy, s.policy->data(), s.policy->size());
        }
        out.economics = to_c(s.economics);
        *scenario = out;
    });
}

ecofarm_status ecofarm_experiment_load(const char* path, ecofarm_experiment** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto exp = std::make_unique<ecofarm_experiment>();
        exp->config = ecofarm::load_experiment(path);
        for (const auto& p : exp->config.policies) exp->estimators.push_back(ecofarm::format_estimator(p.spec.estimator));
        exp->output_dir = exp->config.output_dir.string();
        *out = exp.release();
    });
}

const char* ecofarm_experiment_policy_estimator(const ecofarm_experiment* exp, size_t index) {
    if (!exp || index >= exp->estimators.size()) return nullptr;
    return exp->estimators[index].c_str();
}

const char* ecofarm_experiment_output_dir(const ecofarm_experiment* exp) {
    return exp ? exp->output_dir.c_str() : nullptr;
}

ecofarm_status ecofarm_experiment_trace(const ecofarm_experiment* exp, ecofarm_trace** out) {
    return guarded([&] {
        require(exp, "experiment");
        require(out, "out");
        const auto* tw = std::get_if<ecofarm::TraceWorkload>(&exp->config.workload);
        if (!tw) ecofarm::fail(ecofarm::ErrorCode::Config, "the experiment workload is not a trace");
        *out = new ecofarm_trace{*tw->trace};
    });
}

void ecofarm_experiment_set_seed(ecofarm_experiment* exp, uint64_t seed) {
    if (exp) exp->config.sim.seed = seed;
}

ecofarm_status ecofarm_experiment_set_reps(ecofarm_experiment* exp, size_t reps) {
    return guarded([&] {
        require(exp, "experiment");
        if (reps < 1) ecofarm::fail(ecofarm::ErrorCode::Config, "reps must be >= 1");
        exp->config.reps = reps;
    });
}

size_t ecofarm_experiment_policy_count(const ecofarm_experiment* exp) {
    return exp ? exp->config.policies.size() : 0;
}

const char* ecofarm_experiment_policy_name(const ecofarm_experiment* exp, size_t index) {
    if (!exp || index >= exp->config.policies.size()) return nullptr;
    return exp->config.policies[index].name.c_str();
}

void ecofarm_experiment_free(ecofarm_experiment* exp) { delete exp; }

ecofarm_status ecofarm_experiment_run(const ecofarm_experiment* exp, const char* policy_name,
                                      ecofarm_results** out) {
    return guarded([&] {
        require(exp, "experiment");
        require(out, "out");
        std::optional<std::string> only;
        if (policy_name) only = policy_name;
        *out = new ecofarm_results{ecofarm::run_experiment(exp->config, only), {}};
    });
}

const char* ecofarm_results_summary(ecofarm_results* results, int significant_digits) {
    if (!results) return nullptr;
    results->summary = ecofarm::summary_csv(results->results, significant_digits);
    return results->summary.c_str();
}

ecofarm_status ecofarm_results_write(const ecofarm_results* results, const char* dir) {
    return guarded([&] {
        require(results, "results");
        require(dir, "dir");
        ecofarm::write_results(results->results, dir);
    });
}

void ecofarm_results_free(ecofarm_results* results) { delete results; }

}  // extern "C"
