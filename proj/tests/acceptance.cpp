// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ecofarm/experiment.hpp"
#include "ecofarm/policies.hpp"
#include "ecofarm/queueing.hpp"
#include "ecofarm/simulator.hpp"
#include "ecofarm/trace_io.hpp"
#include "support/observers.hpp"

using namespace ecofarm;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = ECOFARM_SOURCE_DIR;

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// --- 1 -----------------------------------------------------------------------

Verdict erlang_a_correctness() {
    Verdict v;
    const auto dist = steady_state({2.0, 1.0, 1.0, 3});
    std::vector<double> poisson(dist.probs.size());
    double pk = std::exp(-2.0), z = 0.0;
    for (std::size_t k = 0; k < poisson.size(); ++k) {
        poisson[k] = pk;
        z += pk;
        pk *= 2.0 / static_cast<double>(k + 1);
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < poisson.size(); ++k) worst = std::max(worst, std::fabs(dist.probs[k] - poisson[k] / z));
    v.require(worst <= 1e-10, fmt("max |pi_k - Poisson| = %.3g > 1e-10", worst));

    const double p_ab = analyze({1.0, 1.0, 1.0, 1}).p_abandon;
    const double err = std::fabs(p_ab - std::exp(-1.0));
    v.require(err <= 1e-9, fmt("|p_abandon - 1/e| = %.3g > 1e-9", err));
    if (v.pass) v.detail = fmt("max occupancy error %.2g over %zu states, |p_abandon - 1/e| = %.2g", worst, poisson.size(), err);
    return v;
}

// --- 2 -----------------------------------------------------------------------

Verdict rate_conservation() {
    Verdict v;
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double lam = std::exp(std::log(0.01) + u(gen) * std::log(200.0 / 0.01));
        const double mu = std::exp(std::log(0.1) + u(gen) * std::log(100.0));
        const double theta = std::exp(std::log(0.01) + u(gen) * std::log(1000.0));
        const auto n = std::uniform_int_distribution<std::int64_t>(1, 200)(gen);
        const auto m = analyze({lam, mu, theta, n});
        const double gap = std::fabs(lam - (lam * m.p_abandon + mu * static_cast<double>(n) * m.utilization));
        worst = std::max(worst, gap);
    }
    v.require(worst <= 1e-9, fmt("max residual %.3g > 1e-9", worst));
    if (v.pass) v.detail = fmt("1000 instances, max residual %.2g", worst);
    return v;
}

// --- 3 -----------------------------------------------------------------------

Verdict simulator_vs_analytics() {
    Verdict v;
    const auto cfg = load_experiment(kSource / "configs" / "stationary_validation.json");
    const auto& policy = cfg.policies.at(0).spec;
    v.require(cfg.reps == 10 && cfg.sim.duration == 10000.0 && cfg.sim.warmup == 1000.0,
              "bundled validation config does not match 10 x 10000 s with 1000 s warm-up");
    const auto s = run_replications(cfg.sim, cfg.workload, policy, cfg.reps);
    const auto m = analyze({50.0, cfg.sim.mu, cfg.sim.theta, 55});

    std::vector<double> p;
    double lhs = 0.0, rhs = 0.0;
    for (const auto& r : s.runs) {
        p.push_back(r.p_abandon);
        lhs += r.mean_in_system;
        rhs += static_cast<double>(r.arrivals) / (cfg.sim.duration - cfg.sim.warmup) * r.mean_sojourn;
    }
    double mean = 0.0, ss = 0.0;
    for (double x : p) mean += x / static_cast<double>(p.size());
    for (double x : p) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / static_cast<double>(p.size() - 1)) / std::sqrt(static_cast<double>(p.size()));
    const double z = std::fabs(mean - m.p_abandon) / se;
    v.require(z <= 3.0, fmt("p_abandon %.5f vs analytic %.5f is %.2f SE away", mean, m.p_abandon, z));
    const double little = std::fabs(lhs - rhs) / rhs;
    v.require(little <= 0.05, fmt("Little's law off by %.2f%%", 100.0 * little));
    if (v.pass)
        v.detail = fmt("p_abandon %.5f vs %.5f (%.2f SE), Little gap %.3f%%", mean, m.p_abandon, z, 100.0 * little);
    return v;
}

// --- 4 -----------------------------------------------------------------------

Verdict adaptive_oracle_equivalence() {
    Verdict v;
    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        const double lam = 0.5 + 119.5 * u(gen);
        const double mu = 0.5 + 1.5 * u(gen);
        const double theta = (i % 10 == 0) ? 0.0 : 0.05 + 2.0 * u(gen);
        EconomicModel e;
        e.reward_per_job = std::exp(std::log(1e-6) + u(gen) * std::log(1e5));
        e.electricity_price = (i % 7 == 0) ? 0.0 : 0.02 + 0.3 * u(gen);
        e.peak_power = 100.0 + 300.0 * u(gen);
        e.idle_fraction = u(gen);
        e.abandon_penalty = (i % 3 == 0) ? e.reward_per_job * u(gen) : 0.0;
        const std::int64_t n_max = static_cast<std::int64_t>(std::ceil(lam / mu)) + 60;

        std::int64_t best = -1;
        double best_value = -std::numeric_limits<double>::infinity();
        for (std::int64_t n = 0; n <= n_max; ++n) {
            const double value = predicted_revenue_rate(lam, mu, theta, n, e);
            if (std::isinf(value) && value < 0) continue;
            if (best < 0 || value > best_value) {
                best = n;
                best_value = value;
            }
        }
        const auto got = adaptive_staffing(lam, mu, theta, e, n_max);
        if (got.target_servers != best || got.predicted_revenue_rate != best_value) ++mismatches;
    }
    v.require(mismatches == 0, fmt("%d of 200 instances differ from the exhaustive scan", mismatches));
    if (v.pass) v.detail = "200 of 200 instances match the exhaustive scan";
    return v;
}

// --- 5 -----------------------------------------------------------------------

Verdict qed_desk_checks() {
    Verdict v;
    const auto a = qed_staffing(100.0, 1.0, 1.0), b = qed_staffing(100.0, 1.0, 0.5);
    v.require(a == 110, fmt("beta=1 gives %lld, expected 110", static_cast<long long>(a)));
    v.require(b == 105, fmt("beta=0.5 gives %lld, expected 105", static_cast<long long>(b)));
    int violations = 0;
    for (int i = 0; i <= 200; ++i) {
        const double lam = 0.5 * i;
        for (int j = 0; j <= 30; ++j) {
            const double beta = 0.1 * j;
            const auto n = qed_staffing(lam, 1.0, beta);
            if (qed_staffing(lam + 0.5, 1.0, beta) < n) ++violations;
            if (qed_staffing(lam, 1.0, beta + 0.1) < n) ++violations;
        }
    }
    std::mt19937_64 gen(55);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        const double lam = 1000.0 * u(gen), beta = 3.0 * u(gen), mu = 0.1 + 5.0 * u(gen);
        const auto n = qed_staffing(lam, mu, beta);
        if (qed_staffing(lam * (1.0 + u(gen)), mu, beta) < n) ++violations;
        if (qed_staffing(lam, mu, beta + u(gen)) < n) ++violations;
    }
    v.require(violations == 0, fmt("%d monotonicity violations", violations));
    if (v.pass) v.detail = "110 and 105; monotone over 6231 grid points and 5000 random pairs";
    return v;
}

// --- 6 -----------------------------------------------------------------------

Verdict energy_accounting() {
    Verdict v;
    double worst = 0.0;
    int runs = 0;
    const auto trace = std::make_shared<const ArrivalTrace>(load_binned(kSource / "data" / "diurnal_24h_5min.csv"));
    struct Case {
        WorkloadSpec workload;
        PolicySpec policy;
        double duration, warmup, setup;
    };
    const Case cases[] = {
        {StationaryWorkload{50.0}, PolicySpec{StaticPolicy{55}, WindowEstimator{}, 300.0, true}, 3600.0, 600.0, 0.0},
        {StationaryWorkload{30.0}, PolicySpec{QedPolicy{0.5}, EwmaEstimator{0.3}, 300.0, true}, 7200.0, 0.0, 120.0},
        {TraceWorkload{trace}, PolicySpec{AdaptivePolicy{300}, TrendEstimator{5}, 300.0, true}, 21600.0, 1800.0, 60.0},
        {TraceWorkload{trace, ReplayMode::Exact}, PolicySpec{QedPolicy{1.0}, WindowEstimator{3}, 600.0, false}, 14400.0,
         0.0, 300.0},
    };
    for (const auto& c : cases) {
        SimConfig cfg;
        cfg.duration = c.duration;
        cfg.warmup = c.warmup;
        cfg.theta = 1.0;
        cfg.seed = 600 + static_cast<std::uint64_t>(runs);
        cfg.econ.reward_per_job = 0.002;
        cfg.econ.electricity_price = 0.1;
        cfg.econ.setup_duration = c.setup;
        cfg.econ.setup_power = 170.0;
        cfg.initial_servers = 10;
        observers::ShadowEnergy shadow(cfg.econ, cfg.warmup, cfg.duration);
        const auto r = run(cfg, c.workload, c.policy, &shadow);
        for (auto s : {ServerState::Off, ServerState::SettingUp, ServerState::Idle, ServerState::Busy}) {
            const double ref = shadow.watt_hours(s), got = r.energy[s];
            const double rel = ref == 0.0 ? std::fabs(got) : std::fabs(got - ref) / ref;
            worst = std::max(worst, rel);
        }
        ++runs;
    }
    v.require(worst <= 1e-6, fmt("energy_by_state differs from the shadow integrator by %.3g relative", worst));

    SimConfig idle;
    idle.duration = 3600.0;
    idle.initial_servers = 1;
    idle.econ.peak_power = 200.0;
    idle.econ.idle_fraction = 0.65;
    const auto r = run(idle, StationaryWorkload{0.0}, PolicySpec{StaticPolicy{1}, WindowEstimator{}, 300.0, true});
    v.require(r.energy[ServerState::Idle] == 130.0 && r.energy.total() == 130.0,
              fmt("idle hour drew %.17g Wh, expected 130", r.energy.total()));
    if (v.pass) v.detail = fmt("%d runs, worst relative gap %.2g; idle hour = 130 Wh", runs, worst);
    return v;
}

// --- 7 -----------------------------------------------------------------------

Verdict setup_semantics() {
    Verdict v;
    const auto trace = std::make_shared<const ArrivalTrace>(load_binned(kSource / "data" / "diurnal_24h_5min.csv"));
    std::size_t completions = 0, bad = 0, scale_up_runs = 0, runs = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        for (const PolicySpec& policy : {PolicySpec{AdaptivePolicy{300}, TrendEstimator{5}, 300.0, true},
                                         PolicySpec{QedPolicy{1.0}, WindowEstimator{5}, 300.0, true},
                                         PolicySpec{QedPolicy{0.5}, EwmaEstimator{0.5}, 600.0, false}}) {
            SimConfig cfg;
            cfg.duration = 21600.0;
            cfg.theta = 1.0;
            cfg.seed = seed;
            cfg.econ.reward_per_job = 0.002;
            cfg.econ.electricity_price = 0.1;
            cfg.econ.setup_duration = 60.0 * static_cast<double>(seed);
            observers::EventLog log;
            const auto r = run(cfg, TraceWorkload{trace}, policy, &log);
            ++runs;
            completions += log.completions.size();
            for (const auto& c : log.completions)
                if (c.state != ServerState::Busy) ++bad;
            bad += log.completions_off_busy + log.inconsistent;
            if (r.scale_up_events > 0) {
                ++scale_up_runs;
                v.require(r.energy[ServerState::SettingUp] > 0.0,
                          fmt("run with %llu scale-ups drew no setup energy",
                              static_cast<unsigned long long>(r.scale_up_events)));
            }
        }
    }
    v.require(bad == 0, fmt("%zu completions outside the Busy state or inconsistent transitions", bad));
    v.require(scale_up_runs > 0, "no run scaled up, the check is vacuous");
    if (v.pass)
        v.detail = fmt("%zu runs, %zu completions all from Busy, setup energy > 0 in all %zu scaling runs", runs,
                       completions, scale_up_runs);
    return v;
}

// --- 8 -----------------------------------------------------------------------

Verdict estimation_enhancement() {
    Verdict v;
    const auto cfg = load_experiment(kSource / "configs" / "diurnal_compare.json");
    v.require(cfg.reps == 10 && cfg.sim.mu == 1.0 && cfg.sim.theta == 1.0, "bundled comparison config changed");
    const auto res = run_experiment(cfg);
    const SimResult* none = nullptr;
    std::vector<const SimResult*> trend(cfg.reps, none), window(cfg.reps, none);
    for (const auto& p : res.policies) {
        const auto& spec = cfg.policies.at(&p - res.policies.data()).spec;
        const bool is_trend = std::holds_alternative<TrendEstimator>(spec.estimator);
        for (std::size_t r = 0; r < p.summary.runs.size(); ++r) (is_trend ? trend : window)[r] = &p.summary.runs[r];
    }
    int wins = 0;
    for (std::size_t r = 0; r < cfg.reps; ++r)
        if (trend[r] && window[r] && trend[r]->net_revenue >= window[r]->net_revenue) ++wins;
    v.require(wins >= 8, fmt("Trend matched or beat Window in only %d of 10 replications", wins));

    const auto& trace = *std::get<TraceWorkload>(cfg.workload).trace;
    const auto w = evaluate_estimator(WindowEstimator{5}, trace.view());
    const auto t = evaluate_estimator(TrendEstimator{5}, trace.view());
    v.require(t.rmse < w.rmse, fmt("Trend RMSE %.4g is not below Window RMSE %.4g", t.rmse, w.rmse));
    if (v.pass) v.detail = fmt("Trend >= Window in %d/10 replications; RMSE %.3f vs %.3f", wins, t.rmse, w.rmse);
    return v;
}

// --- 9 -----------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism() {
    Verdict v;
    auto stationary = load_experiment(kSource / "configs" / "stationary_validation.json");
    auto diurnal = load_experiment(kSource / "configs" / "diurnal_compare.json");
    diurnal.sim.duration = 6.0 * 3600.0;
    diurnal.reps = 3;
    std::size_t files = 0;
    int pair = 0;
    for (auto* cfg : {&stationary, &diurnal}) {
        for (std::uint64_t seed : {1ULL, 987654321ULL}) {
            cfg->sim.seed = seed;
            const auto a = fs::temp_directory_path() / fmt("ecofarm_accept_%d_a", pair);
            const auto b = fs::temp_directory_path() / fmt("ecofarm_accept_%d_b", pair);
            ++pair;
            fs::remove_all(a);
            fs::remove_all(b);
            write_results(run_experiment(*cfg), a);
            write_results(run_experiment(*cfg), b);
            for (const auto& entry : fs::directory_iterator(a)) {
                ++files;
                const auto twin = b / entry.path().filename();
                v.require(fs::exists(twin) && slurp(entry.path()) == slurp(twin),
                          "file differs between identical runs: " + entry.path().filename().string());
            }
            fs::remove_all(a);
            fs::remove_all(b);
        }
    }
    if (v.pass) v.detail = fmt("%zu result files byte-identical across %d repeated runs", files, pair);
    return v;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;  // wall-clock limit; 0 means none
        std::function<Verdict()> check;
    };
    const Criterion criteria[] = {
        {1, "Erlang-A correctness", 1.0, erlang_a_correctness},
        {2, "rate conservation", 10.0, rate_conservation},
        {3, "simulator vs analytics", 60.0, simulator_vs_analytics},
        {4, "adaptive oracle equivalence", 60.0, adaptive_oracle_equivalence},
        {5, "QED desk checks", 0.0, qed_desk_checks},
        {6, "energy accounting", 0.0, energy_accounting},
        {7, "setup semantics", 0.0, setup_semantics},
        {8, "estimation enhancement", 120.0, estimation_enhancement},
        {9, "determinism", 0.0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("threw: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0.0 && secs > c.budget_s) v.require(false, fmt("took %.1f s, limit %.0f s", secs, c.budget_s));
        std::printf("criterion %d %s: %s (%s) [%.2f s]\n", c.id, c.name, v.pass ? "PASS" : "FAIL", v.detail.c_str(),
                    secs);
        std::fflush(stdout);
        if (!v.pass) ++failed;
    }
    std::printf("%d of 9 criteria passed\n", 9 - failed);
    return failed == 0 ? 0 : 1;
}
