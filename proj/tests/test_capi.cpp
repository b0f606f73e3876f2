#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "ecofarm.h"

namespace fs = std::filesystem;

namespace {

const fs::path kSource = ECOFARM_SOURCE_DIR;

}  // namespace

TEST_CASE("queue analysis through the C API") {
    const ecofarm_queue_params p{1.0, 1.0, 1.0, 1};
    ecofarm_metrics m;
    REQUIRE(ecofarm_analyze(&p, 0.0, &m) == ECOFARM_OK);
    CHECK(m.p_abandon == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    std::size_t len = 0;
    REQUIRE(ecofarm_steady_state(&p, 0.0, nullptr, 0, &len) == ECOFARM_OK);
    CHECK(len > 10);
    std::vector<double> probs(len);
    REQUIRE(ecofarm_steady_state(&p, 0.0, probs.data(), probs.size(), &len) == ECOFARM_OK);
    CHECK(probs[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    double c = 0.0;
    REQUIRE(ecofarm_erlang_c(1.0, 1.0, 2, &c) == ECOFARM_OK);
    CHECK(c == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("status codes and error text") {
    const ecofarm_queue_params unstable{2.0, 1.0, 0.0, 1};
    ecofarm_metrics m;
    CHECK(ecofarm_analyze(&unstable, 0.0, &m) == ECOFARM_UNSTABLE);
    CHECK(std::strstr(ecofarm_last_error(), "steady state") != nullptr);
    const ecofarm_queue_params bad{-1.0, 1.0, 0.0, 1};
    CHECK(ecofarm_analyze(&bad, 0.0, &m) == ECOFARM_INVALID_PARAMETER);
    CHECK(ecofarm_analyze(nullptr, 0.0, &m) == ECOFARM_INVALID_PARAMETER);
    CHECK(ecofarm_analyze(&bad, 0.0, nullptr) == ECOFARM_INVALID_PARAMETER);
    CHECK(std::string(ecofarm_status_string(ECOFARM_OK)) != "");
    CHECK(std::string(ecofarm_version()) == "0.1.0");
}

TEST_CASE("staffing through the C API") {
    ecofarm_staffing s;
    REQUIRE(ecofarm_staff_qed(100.0, 1.0, 1.0, nullptr, 0.0, &s) == ECOFARM_OK);
    CHECK(s.target_servers == 110);
    REQUIRE(ecofarm_staff_qed(100.0, 1.0, 0.5, nullptr, 0.0, &s) == ECOFARM_OK);
    CHECK(s.target_servers == 105);

    ecofarm_economics e;
    ecofarm_economics_defaults(&e);
    CHECK(e.peak_power == 200.0);
    CHECK(e.idle_fraction == 0.65);
    CHECK(e.setup_power < 0.0);
    e.reward_per_job = 1.0;
    e.electricity_price = 0.10;
    REQUIRE(ecofarm_staff_adaptive(50.0, 1.0, 1.0, &e, 100, &s) == ECOFARM_OK);
    CHECK(s.target_servers == 85);
    CHECK(s.predicted_revenue_rate == doctest::Approx(49.999590446732768).epsilon(1e-10));
    REQUIRE(ecofarm_staff_static(10, 5.0, 1.0, 1.0, &e, &s) == ECOFARM_OK);
    CHECK(s.target_servers == 10);
    CHECK(ecofarm_staff_adaptive(50.0, 1.0, 1.0, nullptr, 100, &s) == ECOFARM_INVALID_PARAMETER);
}

TEST_CASE("trace handles") {
    ecofarm_trace* t = nullptr;
    REQUIRE(ecofarm_trace_synthesize_diurnal(100.0, 50.0, 86400.0, 300.0, 288, 0, 0, &t) == ECOFARM_OK);
    CHECK(ecofarm_trace_bins(t) == 288);
    CHECK(ecofarm_trace_bin_width(t) == 300.0);

    ecofarm_estimator_report w, tr;
    REQUIRE(ecofarm_estimator_evaluate(t, "window:5", &w) == ECOFARM_OK);
    REQUIRE(ecofarm_estimator_evaluate(t, "trend:5", &tr) == ECOFARM_OK);
    CHECK(w.rmse == doctest::Approx(2.2926238836085142).epsilon(1e-12));
    CHECK(tr.rmse < w.rmse);
    CHECK(ecofarm_estimator_evaluate(t, "median:5", &w) == ECOFARM_PARSE_ERROR);
    double next = 0.0;
    REQUIRE(ecofarm_estimator_forecast(t, "window:1", &next) == ECOFARM_OK);
    CHECK(next == doctest::Approx(static_cast<double>(ecofarm_trace_count(t, 287)) / 300.0));

    const auto path = fs::temp_directory_path() / "ecofarm_capi_trace.csv";
    REQUIRE(ecofarm_trace_save_binned(t, path.string().c_str()) == ECOFARM_OK);
    ecofarm_trace* back = nullptr;
    REQUIRE(ecofarm_trace_load_binned(path.string().c_str(), &back) == ECOFARM_OK);
    for (std::size_t i = 0; i < 288; ++i) CHECK(ecofarm_trace_count(back, i) == ecofarm_trace_count(t, i));
    ecofarm_trace_free(back);
    ecofarm_trace_free(t);
    fs::remove(path);

    CHECK(ecofarm_trace_load_binned("/no/such/trace.csv", &back) == ECOFARM_IO_ERROR);
    ecofarm_trace_free(nullptr);
}

TEST_CASE("experiments through the C API") {
    ecofarm_experiment* exp = nullptr;
    const auto cfg = kSource / "configs" / "stationary_validation.json";
    REQUIRE(ecofarm_experiment_load(cfg.string().c_str(), &exp) == ECOFARM_OK);
    CHECK(ecofarm_experiment_policy_count(exp) == 1);
    CHECK(std::string(ecofarm_experiment_policy_name(exp, 0)) == "static55");
    CHECK(ecofarm_experiment_policy_name(exp, 5) == nullptr);
    ecofarm_trace* none = nullptr;
    CHECK(ecofarm_experiment_trace(exp, &none) == ECOFARM_CONFIG_ERROR);
    CHECK(ecofarm_experiment_set_reps(exp, 0) == ECOFARM_CONFIG_ERROR);
    REQUIRE(ecofarm_experiment_set_reps(exp, 2) == ECOFARM_OK);
    ecofarm_experiment_set_seed(exp, 3);

    ecofarm_results* res = nullptr;
    REQUIRE(ecofarm_experiment_run(exp, nullptr, &res) == ECOFARM_OK);
    const std::string summary = ecofarm_results_summary(res, 6);
    CHECK(summary.rfind("policy,served,abandoned,p_abandon,energy_kwh,net_revenue,ci_halfwidth\nstatic55,", 0) == 0);
    const auto dir = fs::temp_directory_path() / "ecofarm_capi_results";
    fs::remove_all(dir);
    REQUIRE(ecofarm_results_write(res, dir.string().c_str()) == ECOFARM_OK);
    CHECK(fs::exists(dir / "series_static55_rep1.csv"));
    ecofarm_results_free(res);
    CHECK(ecofarm_experiment_run(exp, "missing", &res) == ECOFARM_CONFIG_ERROR);
    ecofarm_experiment_free(exp);
    fs::remove_all(dir);

    CHECK(ecofarm_experiment_load("/no/such/config.json", &exp) == ECOFARM_CONFIG_ERROR);
}

TEST_CASE("scenario overlays") {
    ecofarm_scenario s;
    ecofarm_scenario_init(&s);
    CHECK(s.has_arrival_rate == 0);
    const auto cfg = kSource / "configs" / "stationary_validation.json";
    REQUIRE(ecofarm_scenario_load(cfg.string().c_str(), &s) == ECOFARM_OK);
    CHECK(s.has_arrival_rate == 1);
    CHECK(s.arrival_rate == 50.0);
    CHECK(s.abandon_rate == 0.5);
    CHECK(s.has_servers == 1);
    CHECK(s.servers == 55);
    CHECK(s.economics.reward_per_job == 0.01);
}
