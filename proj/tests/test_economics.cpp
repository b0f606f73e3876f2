#include <doctest.h>

#include "ecofarm/economics.hpp"
#include "ecofarm/error.hpp"

using namespace ecofarm;

TEST_CASE("power is linear in utilization between idle floor and peak") {
    EconomicModel e;
    CHECK(server_power(power_state::Off{}, e) == 0.0);
    CHECK(server_power(power_state::Active{0.0}, e) == doctest::Approx(130.0));
    CHECK(server_power(power_state::Active{1.0}, e) == doctest::Approx(200.0));
    CHECK(server_power(power_state::Active{0.5}, e) == doctest::Approx(165.0));
    CHECK(server_power(power_state::SettingUp{}, e) == 200.0);
    e.setup_power = 150.0;
    CHECK(server_power(power_state::SettingUp{}, e) == 150.0);
    CHECK_THROWS_AS(server_power(power_state::Active{1.5}, e), Error);
}

TEST_CASE("an idle server for an hour costs 130 Wh") {
    EconomicModel e;
    e.electricity_price = 0.2;
    const double ws = server_power(power_state::Active{0.0}, e) * 3600.0;
    CHECK(ws / 3600.0 == 130.0);
    CHECK(energy_cost(ws, e) == doctest::Approx(0.13 * 0.2).epsilon(1e-15));
}

TEST_CASE("net revenue rate") {
    EconomicModel e;
    e.reward_per_job = 2.0;
    e.abandon_penalty = 1.0;
    e.electricity_price = 0.36;
    const QueueParams p{10.0, 1.0, 1.0, 12};
    PerformanceMetrics m;
    m.p_abandon = 0.1;
    m.utilization = 0.75;
    const double power = 200.0 * (0.65 + 0.35 * 0.75);
    const double expect = 2.0 * 10.0 * 0.9 - 1.0 * 10.0 * 0.1 - 0.36 * 12 * power / 3.6e6;
    CHECK(net_revenue_rate(p, m, e) == doctest::Approx(expect).epsilon(1e-14));

    const QueueParams none{10.0, 1.0, 1.0, 0};
    m.p_abandon = 1.0;
    m.utilization = 0.0;
    CHECK(net_revenue_rate(none, m, e) == doctest::Approx(-10.0));
}

TEST_CASE("economic model validation") {
    auto bad = [](auto mutate) {
        EconomicModel e;
        mutate(e);
        return [e] { validate(e); };
    };
    CHECK_NOTHROW(validate(EconomicModel{}));
    CHECK_THROWS_AS(bad([](EconomicModel& e) { e.peak_power = 0.0; })(), Error);
    CHECK_THROWS_AS(bad([](EconomicModel& e) { e.idle_fraction = 1.1; })(), Error);
    CHECK_THROWS_AS(bad([](EconomicModel& e) { e.electricity_price = -1.0; })(), Error);
    CHECK_THROWS_AS(bad([](EconomicModel& e) { e.setup_duration = -1.0; })(), Error);
    CHECK_THROWS_AS(bad([](EconomicModel& e) { e.setup_power = -5.0; })(), Error);
}
