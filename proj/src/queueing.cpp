#include "ecofarm/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ecofarm/error.hpp"

namespace ecofarm {
namespace {

constexpr std::size_t kMaxTruncation = std::size_t{1} << 24;

std::string describe(const QueueParams& p) {
    std::ostringstream os;
    os << "(lambda=" << p.arrival_rate << ", mu=" << p.service_rate << ", theta=" << p.abandon_rate
       << ", n=" << p.servers << ")";
    return os.str();
}

// Un-normalized log weights log(pi_k / pi_0) for k = 0..level.
void extend_log_weights(const QueueParams& p, std::vector<double>& lw, std::size_t level) {
    const double log_lambda = std::log(p.arrival_rate);
    if (lw.empty()) lw.push_back(0.0);
    lw.reserve(level + 1);
    for (std::size_t k = lw.size(); k <= level; ++k)
        lw.push_back(lw.back() + log_lambda - std::log(death_rate(p, k)));
}

SteadyStateDistribution normalize(const std::vector<double>& lw, std::size_t level) {
    const double peak = *std::max_element(lw.begin(), lw.begin() + static_cast<std::ptrdiff_t>(level) + 1);
    SteadyStateDistribution dist;
    dist.truncation_level = level;
    dist.probs.resize(level + 1);
    double sum = 0.0;
    for (std::size_t k = 0; k <= level; ++k) {
        dist.probs[k] = std::exp(lw[k] - peak);
        sum += dist.probs[k];
    }
    for (double& v : dist.probs) v /= sum;
    return dist;
}

SteadyStateDistribution point_mass_at_zero() {
    SteadyStateDistribution dist;
    dist.probs = {1.0};
    dist.truncation_level = 0;
    return dist;
}

}  // namespace

bool is_stable(const QueueParams& p) noexcept {
    if (p.abandon_rate > 0.0 || p.arrival_rate == 0.0) return true;
    return p.arrival_rate < static_cast<double>(p.servers) * p.service_rate;
}

void validate(const QueueParams& p) {
    if (!std::isfinite(p.arrival_rate) || p.arrival_rate < 0.0)
        fail(ErrorCode::InvalidParameter, "arrival rate must be finite and >= 0 " + describe(p));
    if (!std::isfinite(p.service_rate) || p.service_rate <= 0.0)
        fail(ErrorCode::InvalidParameter, "service rate must be finite and > 0 " + describe(p));
    if (!std::isfinite(p.abandon_rate) || p.abandon_rate < 0.0)
        fail(ErrorCode::InvalidParameter, "abandonment rate must be finite and >= 0 " + describe(p));
    if (p.servers < 0) fail(ErrorCode::InvalidParameter, "server count must be >= 0 " + describe(p));
    if (!is_stable(p))
        fail(ErrorCode::Unstable,
             "no steady state without abandonment when lambda >= n*mu " + describe(p));
}

double death_rate(const QueueParams& p, std::size_t k) noexcept {
    const auto n = static_cast<std::size_t>(p.servers);
    const double busy = static_cast<double>(std::min(k, n));
    const double waiting = static_cast<double>(k > n ? k - n : 0);
    return busy * p.service_rate + waiting * p.abandon_rate;
}

SteadyStateDistribution steady_state(const QueueParams& params, double tolerance) {
    validate(params);
    if (!(tolerance > 0.0 && tolerance <= 1e-6))
        fail(ErrorCode::InvalidParameter, "truncation tolerance must lie in (0, 1e-6]");
    if (params.arrival_rate == 0.0) return point_mass_at_zero();

    const double load = params.arrival_rate / params.service_rate;
    auto level = static_cast<std::size_t>(
        static_cast<double>(std::max<std::int64_t>(params.servers, static_cast<std::int64_t>(std::ceil(load)))) +
        std::ceil(10.0 * std::sqrt(std::max(1.0, load))));

    std::vector<double> lw;
    for (;;) {
        extend_log_weights(params, lw, level);
        const double ratio = params.arrival_rate / death_rate(params, level + 1);
        if (ratio < 1.0) {
            auto dist = normalize(lw, level);
            const double tail_bound = dist.probs.back() * ratio / (1.0 - ratio);
            if (tail_bound < tolerance) return dist;
        }
        if (level >= kMaxTruncation)
            fail(ErrorCode::InvalidParameter, "truncation level exceeds limit for " + describe(params));
        level = std::min(kMaxTruncation, level + level / 2 + 16);
    }
}

SteadyStateDistribution steady_state_truncated(const QueueParams& params, std::size_t level) {
    validate(params);
    if (params.arrival_rate == 0.0) {
        SteadyStateDistribution dist;
        dist.probs.assign(level + 1, 0.0);
        dist.probs[0] = 1.0;
        dist.truncation_level = level;
        return dist;
    }
    std::vector<double> lw;
    extend_log_weights(params, lw, level);
    return normalize(lw, level);
}

PerformanceMetrics performance_metrics(const QueueParams& params, const SteadyStateDistribution& dist) {
    validate(params);
    if (dist.probs.empty() || dist.probs.size() != dist.truncation_level + 1)
        fail(ErrorCode::Mismatch, "distribution length does not match its truncation level");

    const auto n = static_cast<std::size_t>(params.servers);
    const double lambda = params.arrival_rate;
    const double mu = params.service_rate;
    const double theta = params.abandon_rate;
    const double capacity = static_cast<double>(n) * mu;

    PerformanceMetrics m;
    double abandon_flow = 0.0;
    double busy = 0.0;
    double served_prob = 0.0;
    double served_wait = 0.0;

    // A tagged arrival that finds i jobs waiting ahead of it is served with
    // probability a_i and contributes b_i = E[wait * 1{served}].
    double reach_head = 1.0;  // a_{i-1}
    double weighted = 0.0;    // b_{i-1}

    for (std::size_t k = 0; k < dist.probs.size(); ++k) {
        const double pk = dist.probs[k];
        const double in_service = static_cast<double>(std::min(k, n));
        const double waiting = static_cast<double>(k > n ? k - n : 0);
        m.mean_in_system += pk * static_cast<double>(k);
        m.mean_queue += pk * waiting;
        busy += pk * in_service;
        abandon_flow += pk * waiting * theta;
        if (k < n) {
            served_prob += pk;
        } else {
            m.p_wait += pk;
            const double advance = capacity + waiting * theta;
            const double exit_rate = advance + theta;
            if (exit_rate > 0.0) {
                const double a = advance / exit_rate * reach_head;
                const double b = a / exit_rate + advance / exit_rate * weighted;
                reach_head = a;
                weighted = b;
            } else {
                reach_head = 0.0;
                weighted = 0.0;
            }
            served_prob += pk * reach_head;
            served_wait += pk * weighted;
        }
    }

    m.p_abandon = lambda > 0.0 ? std::clamp(abandon_flow / lambda, 0.0, 1.0) : 0.0;
    m.utilization = n > 0 ? std::min(1.0, busy / static_cast<double>(n)) : 0.0;
    m.p_wait = std::min(1.0, m.p_wait);
    m.throughput = lambda * (1.0 - m.p_abandon);
    m.mean_wait_served = served_prob > 0.0 ? served_wait / served_prob : 0.0;
    return m;
}

PerformanceMetrics analyze(const QueueParams& params, double tolerance) {
    return performance_metrics(params, steady_state(params, tolerance));
}

double erlang_c(double arrival_rate, double service_rate, std::int64_t servers) {
    validate(QueueParams{arrival_rate, service_rate, 0.0, servers});
    if (arrival_rate == 0.0) return 0.0;
    const double load = arrival_rate / service_rate;
    double blocking = 1.0;
    for (std::int64_t k = 1; k <= servers; ++k)
        blocking = load * blocking / (static_cast<double>(k) + load * blocking);
    const auto n = static_cast<double>(servers);
    return n * blocking / (n - load * (1.0 - blocking));
}

}  // namespace ecofarm
