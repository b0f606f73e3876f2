#include "ecofarm/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ecofarm/error.hpp"
#include "ecofarm/trace_io.hpp"

namespace ecofarm {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { fail(ErrorCode::Config, what); }

void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) config_error(std::string(where) + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) config_error("unknown key '" + key + "' in " + std::string(where));
    }
}

double get_number(const json& obj, const char* key, double fallback, std::string_view where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) config_error(std::string(where) + "." + key + " must be a number");
    return v.get<double>();
}

std::int64_t get_integer(const json& obj, const char* key, std::int64_t fallback, std::string_view where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) config_error(std::string(where) + "." + key + " must be an integer");
    return v.get<std::int64_t>();
}

bool get_bool(const json& obj, const char* key, bool fallback, std::string_view where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) config_error(std::string(where) + "." + key + " must be true or false");
    return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, std::string_view where) {
    if (!obj.contains(key)) config_error(std::string(where) + "." + key + " is required");
    const json& v = obj.at(key);
    if (!v.is_string()) config_error(std::string(where) + "." + key + " must be a string");
    return v.get<std::string>();
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        config_error(std::string("malformed JSON: ") + e.what());
    }
}

EconomicModel economics_from(const json& obj, EconomicModel e) {
    constexpr std::string_view where = "economics";
    reject_unknown(obj, where,
                   {"reward_per_job", "electricity_price", "p_peak", "idle_fraction", "p_setup", "setup_duration",
                    "sla_penalty_per_abandon"});
    e.reward_per_job = get_number(obj, "reward_per_job", e.reward_per_job, where);
    e.electricity_price = get_number(obj, "electricity_price", e.electricity_price, where);
    e.peak_power = get_number(obj, "p_peak", e.peak_power, where);
    e.idle_fraction = get_number(obj, "idle_fraction", e.idle_fraction, where);
    if (obj.contains("p_setup")) e.setup_power = get_number(obj, "p_setup", 0.0, where);
    e.setup_duration = get_number(obj, "setup_duration", e.setup_duration, where);
    e.abandon_penalty = get_number(obj, "sla_penalty_per_abandon", e.abandon_penalty, where);
    return e;
}

WorkloadSpec workload_from(const json& obj, const std::filesystem::path& base_dir) {
    reject_unknown(obj, "workload", {"type", "rate", "path", "mode"});
    const std::string type = get_string(obj, "type", "workload");
    if (type == "stationary") {
        if (obj.contains("path") || obj.contains("mode")) config_error("stationary workload takes only 'rate'");
        if (!obj.contains("rate")) config_error("workload.rate is required for a stationary workload");
        return StationaryWorkload{get_number(obj, "rate", 0.0, "workload")};
    }
    if (type == "trace") {
        if (obj.contains("rate")) config_error("trace workload does not take 'rate'");
        std::filesystem::path path = get_string(obj, "path", "workload");
        if (path.is_relative()) path = base_dir / path;
        if (!std::filesystem::exists(path)) config_error("trace file not found: " + path.string());
        ReplayMode mode = ReplayMode::PiecewisePoisson;
        if (obj.contains("mode")) {
            const std::string m = get_string(obj, "mode", "workload");
            if (m == "replay")
                mode = ReplayMode::Exact;
            else if (m != "poisson")
                config_error("workload.mode must be 'poisson' or 'replay'");
        }
        return TraceWorkload{std::make_shared<const ArrivalTrace>(load_binned(path)), mode};
    }
    config_error("workload.type must be 'stationary' or 'trace'");
}

NamedPolicy policy_from(const json& obj, double default_epoch, std::size_t index) {
    const std::string where = "policies[" + std::to_string(index) + "]";
    reject_unknown(obj, where,
                   {"name", "kind", "n", "beta", "n_max", "early_exit", "estimator", "epoch_length", "switching_guard"});
    NamedPolicy p;
    p.name = get_string(obj, "name", where);
    const std::string kind = get_string(obj, "kind", where);
    const auto only = [&](std::initializer_list<const char*> keys) {
        for (const char* k : {"n", "beta", "n_max", "early_exit"}) {
            bool allowed = false;
            for (const char* a : keys) allowed = allowed || std::string_view(a) == k;
            if (!allowed && obj.contains(k)) config_error(where + "." + k + " does not apply to a " + kind + " policy");
        }
    };
    if (kind == "static") {
        only({"n"});
        if (!obj.contains("n")) config_error(where + ".n is required for a static policy");
        p.spec.kind = StaticPolicy{get_integer(obj, "n", 0, where)};
    } else if (kind == "qed") {
        only({"beta"});
        p.spec.kind = QedPolicy{get_number(obj, "beta", 1.0, where)};
    } else if (kind == "adaptive") {
        only({"n_max", "early_exit"});
        p.spec.kind = AdaptivePolicy{get_integer(obj, "n_max", 1000, where), get_bool(obj, "early_exit", false, where)};
    } else {
        config_error(where + ".kind must be 'static', 'qed' or 'adaptive'");
    }
    if (obj.contains("estimator")) {
        try {
            p.spec.estimator = parse_estimator(get_string(obj, "estimator", where));
        } catch (const Error& e) {
            config_error(where + ".estimator: " + e.what());
        }
    }
    p.spec.epoch_length = get_number(obj, "epoch_length", default_epoch, where);
    p.spec.switching_guard = get_bool(obj, "switching_guard", true, where);
    return p;
}

std::string shortest(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string significant(double v, int digits) {
    if (digits <= 0) return shortest(v);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

bool valid_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    return true;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << content;
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

json result_to_json(const SimResult& r) {
    const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["arrivals"] = r.arrivals;
    j["served"] = r.served;
    j["abandoned"] = r.abandoned;
    j["in_system_at_end"] = r.in_system_at_end;
    j["energy_wh"] = {{"off", r.energy[ServerState::Off]},
                      {"setting_up", r.energy[ServerState::SettingUp]},
                      {"idle", r.energy[ServerState::Idle]},
                      {"busy", r.energy[ServerState::Busy]}};
    j["energy_kwh"] = r.energy_kwh();
    j["net_revenue"] = num(r.net_revenue);
    j["mean_wait_served"] = r.mean_wait_served;
    j["p_abandon"] = r.p_abandon;
    j["mean_in_system"] = r.mean_in_system;
    j["mean_sojourn"] = r.mean_sojourn;
    j["scale_up_events"] = r.scale_up_events;
    j["vetoed_scale_ups"] = r.vetoed_scale_ups;
    return j;
}

json summary_to_json(const MetricSummary& m) { return json{{"mean", m.mean}, {"ci_halfwidth", m.half_width}}; }

}  // namespace

void validate(const ExperimentConfig& c) {
    try {
        validate(c.sim);
        if (c.reps < 1) config_error("simulation.reps must be >= 1");
        if (c.policies.empty()) config_error("at least one policy is required");
        std::set<std::string> names;
        for (const auto& p : c.policies) {
            if (!valid_name(p.name))
                config_error("policy name '" + p.name + "' must use only letters, digits, '_', '-' or '.'");
            if (!names.insert(p.name).second) config_error("duplicate policy name '" + p.name + "'");
            validate(p.spec, c.sim.econ);
        }
        const WorkloadSource probe(c.workload, 0);
        if (probe.horizon() < c.sim.duration)
            config_error("the trace is shorter than simulation.duration");
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) throw;
        config_error(e.what());
    }
}

ExperimentConfig parse_experiment(std::string_view json_text, const std::filesystem::path& base_dir) {
    const json root = parse_json(json_text);
    reject_unknown(root, "config",
                   {"workload", "service", "economics", "simulation", "policies", "analysis", "staffing", "output"});
    for (const char* key : {"workload", "service", "simulation", "policies"})
        if (!root.contains(key)) config_error(std::string("missing '") + key + "' block");

    ExperimentConfig c;
    c.workload = workload_from(root.at("workload"), base_dir);

    const json& service = root.at("service");
    reject_unknown(service, "service", {"mu", "theta"});
    c.sim.mu = get_number(service, "mu", 1.0, "service");
    c.sim.theta = get_number(service, "theta", 0.0, "service");

    if (root.contains("economics")) c.sim.econ = economics_from(root.at("economics"), c.sim.econ);

    const json& sim = root.at("simulation");
    reject_unknown(sim, "simulation", {"duration", "warmup", "seed", "reps", "epoch_length", "initial_n"});
    if (!sim.contains("duration")) config_error("simulation.duration is required");
    c.sim.duration = get_number(sim, "duration", 0.0, "simulation");
    c.sim.warmup = get_number(sim, "warmup", 0.0, "simulation");
    if (sim.contains("seed")) {
        if (!sim.at("seed").is_number_unsigned()) config_error("simulation.seed must be a non-negative integer");
        c.sim.seed = sim.at("seed").get<std::uint64_t>();
    }
    const std::int64_t reps = get_integer(sim, "reps", 1, "simulation");
    if (reps < 1) config_error("simulation.reps must be >= 1");
    c.reps = static_cast<std::size_t>(reps);
    c.epoch_length = get_number(sim, "epoch_length", 300.0, "simulation");
    c.sim.initial_servers = get_integer(sim, "initial_n", 0, "simulation");

    const json& policies = root.at("policies");
    if (!policies.is_array()) config_error("'policies' must be an array");
    for (std::size_t i = 0; i < policies.size(); ++i) c.policies.push_back(policy_from(policies[i], c.epoch_length, i));

    if (root.contains("output")) {
        const json& output = root.at("output");
        reject_unknown(output, "output", {"dir"});
        if (output.contains("dir")) {
            c.output_dir = get_string(output, "dir", "output");
            if (c.output_dir.is_relative()) c.output_dir = base_dir / c.output_dir;
        }
    }

    validate(c);
    return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) config_error("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_experiment(buf.str(), path.parent_path());
}

EconomicModel parse_economics(std::string_view json_text, EconomicModel base) {
    const json root = parse_json(json_text);
    if (!root.is_object()) config_error("economics file must hold a JSON object");
    EconomicModel e = economics_from(root.contains("economics") ? root.at("economics") : root, base);
    try {
        validate(e);
    } catch (const Error& err) {
        config_error(err.what());
    }
    return e;
}

EconomicModel load_economics(const std::filesystem::path& path, EconomicModel base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) config_error("cannot open economics file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_economics(buf.str(), base);
}

Scenario parse_scenario(std::string_view json_text, EconomicModel base) {
    const json root = parse_json(json_text);
    if (!root.is_object()) config_error("config must hold a JSON object");
    Scenario s;
    s.economics = base;
    const auto opt_number = [](const json& obj, const char* key, std::string_view where) -> std::optional<double> {
        if (!obj.contains(key)) return std::nullopt;
        return get_number(obj, key, 0.0, where);
    };
    const auto opt_integer = [](const json& obj, const char* key,
                                std::string_view where) -> std::optional<std::int64_t> {
        if (!obj.contains(key)) return std::nullopt;
        return get_integer(obj, key, 0, where);
    };
    if (root.contains("workload") && root.at("workload").is_object())
        s.arrival_rate = opt_number(root.at("workload"), "rate", "workload");
    if (root.contains("service")) {
        const json& service = root.at("service");
        reject_unknown(service, "service", {"mu", "theta"});
        s.service_rate = opt_number(service, "mu", "service");
        s.abandon_rate = opt_number(service, "theta", "service");
    }
    if (root.contains("economics")) {
        s.economics = economics_from(root.at("economics"), base);
        try {
            validate(s.economics);
        } catch (const Error& e) {
            config_error(e.what());
        }
    }
    if (root.contains("analysis")) {
        const json& a = root.at("analysis");
        reject_unknown(a, "analysis", {"servers", "tolerance"});
        s.servers = opt_integer(a, "servers", "analysis");
        s.tolerance = opt_number(a, "tolerance", "analysis");
    }
    if (root.contains("staffing")) {
        const json& st = root.at("staffing");
        reject_unknown(st, "staffing", {"policy", "beta", "n_max", "n"});
        if (st.contains("policy")) s.policy = get_string(st, "policy", "staffing");
        s.beta = opt_number(st, "beta", "staffing");
        s.max_servers = opt_integer(st, "n_max", "staffing");
        s.static_servers = opt_integer(st, "n", "staffing");
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path, EconomicModel base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) config_error("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), base);
}

ExperimentResults run_experiment(const ExperimentConfig& config, std::optional<std::string> policy_name) {
    validate(config);
    ExperimentResults out;
    out.seed = config.sim.seed;
    bool matched = false;
    for (const auto& p : config.policies) {
        if (policy_name && p.name != *policy_name) continue;
        matched = true;
        PolicyOutcome o;
        o.name = p.name;
        if (config.reps >= 2) {
            o.summary = run_replications(config.sim, config.workload, p.spec, config.reps);
        } else {
            SimConfig c = config.sim;
            c.seed = replication_seed(config.sim.seed, 0);
            o.summary = summarize({run(c, config.workload, p.spec)});
        }
        out.policies.push_back(std::move(o));
    }
    if (!matched) config_error("no policy named '" + policy_name.value_or("") + "'");
    return out;
}

std::string summary_csv(const ExperimentResults& results, int digits) {
    std::ostringstream os;
    os << "policy,served,abandoned,p_abandon,energy_kwh,net_revenue,ci_halfwidth\n";
    for (const auto& p : results.policies) {
        const auto& s = p.summary;
        os << p.name << ',' << significant(s.served.mean, digits) << ',' << significant(s.abandoned.mean, digits)
           << ',' << significant(s.p_abandon.mean, digits) << ',' << significant(s.energy_kwh.mean, digits) << ','
           << significant(s.net_revenue.mean, digits) << ',' << significant(s.net_revenue.half_width, digits)
           << '\n';
    }
    return os.str();
}

std::string series_csv(const SimResult& r) {
    std::ostringstream os;
    os << "time,n_target,n_active,rate_estimate,arrivals,abandoned\n";
    for (const auto& e : r.epochs)
        os << shortest(e.time) << ',' << e.n_target << ',' << e.n_active << ',' << shortest(e.rate_estimate) << ','
           << e.arrivals << ',' << e.abandoned << '\n';
    return os.str();
}

std::string results_json(const ExperimentResults& results) {
    json root;
    root["seed"] = results.seed;
    root["policies"] = json::array();
    for (const auto& p : results.policies) {
        json jp;
        jp["name"] = p.name;
        const auto& s = p.summary;
        jp["summary"] = {{"arrivals", summary_to_json(s.arrivals)},
                         {"served", summary_to_json(s.served)},
                         {"abandoned", summary_to_json(s.abandoned)},
                         {"p_abandon", summary_to_json(s.p_abandon)},
                         {"energy_kwh", summary_to_json(s.energy_kwh)},
                         {"net_revenue", summary_to_json(s.net_revenue)},
                         {"mean_wait_served", summary_to_json(s.mean_wait_served)}};
        jp["replications"] = json::array();
        for (const auto& r : s.runs) jp["replications"].push_back(result_to_json(r));
        root["policies"].push_back(std::move(jp));
    }
    return root.dump(2) + "\n";
}

void write_results(const ExperimentResults& results, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / "summary.csv", summary_csv(results));
    write_file(dir / "results.json", results_json(results));
    for (const auto& p : results.policies)
        for (std::size_t r = 0; r < p.summary.runs.size(); ++r)
            write_file(dir / ("series_" + p.name + "_rep" + std::to_string(r) + ".csv"),
                       series_csv(p.summary.runs[r]));
}

}  // namespace ecofarm
