#include "ecofarm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <queue>

#include <boost/math/distributions/students_t.hpp>

#include "ecofarm/error.hpp"

namespace ecofarm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

enum class EventType : std::uint8_t { Completion, Abandonment, SetupComplete, PolicyEpoch, Arrival };

struct Event {
    double time;
    EventType type;
    std::uint64_t seq;
    std::uint64_t target;      // server index or job id
    std::uint64_t generation;  // server generation when scheduled

    bool operator>(const Event& o) const noexcept {
        if (time != o.time) return time > o.time;
        if (type != o.type) return type > o.type;
        return seq > o.seq;
    }
};

struct Server {
    ServerState state = ServerState::Off;
    bool draining = false;
    double entered = 0.0;
    std::uint64_t generation = 0;
    double job_arrival = 0.0;
    bool job_counted = false;
    std::array<double, 4> watt_seconds{};
};

struct Waiting {
    std::uint64_t id;
    double arrival;
    bool counted;
    bool abandoned;
};

class Simulation {
public:
    Simulation(const SimConfig& config, const WorkloadSpec& workload, const PolicySpec& policy,
               SimObserver* observer)
        : cfg_(config),
          policy_(policy),
          observer_(observer),
          workload_(workload, stream_seed(config.seed, Stream::Arrivals)),
          service_rng_(stream_seed(config.seed, Stream::Service)),
          patience_rng_(stream_seed(config.seed, Stream::Patience)) {
        power_[static_cast<std::size_t>(ServerState::Off)] = 0.0;
        power_[static_cast<std::size_t>(ServerState::SettingUp)] = server_power(power_state::SettingUp{}, cfg_.econ);
        power_[static_cast<std::size_t>(ServerState::Idle)] = server_power(power_state::Active{0.0}, cfg_.econ);
        power_[static_cast<std::size_t>(ServerState::Busy)] = server_power(power_state::Active{1.0}, cfg_.econ);
        history_bin_ = workload_.native_bin_width() > 0.0 ? workload_.native_bin_width() : policy_.epoch_length;
    }

    SimResult execute() {
        for (std::int64_t i = 0; i < cfg_.initial_servers; ++i) {
            const std::size_t s = add_server();
            transition(s, ServerState::Idle, 0.0);
            idle_.push_back(s);
        }
        schedule(0.0, EventType::PolicyEpoch, 0, 0);
        schedule_next_arrival();

        while (!events_.empty()) {
            const Event ev = events_.top();
            if (ev.time >= cfg_.duration) break;
            events_.pop();
            advance_clock(ev.time);
            switch (ev.type) {
                case EventType::Completion: on_completion(ev); break;
                case EventType::Abandonment: on_abandonment(ev); break;
                case EventType::SetupComplete: on_setup_complete(ev); break;
                case EventType::PolicyEpoch: on_epoch(ev.time); break;
                case EventType::Arrival: on_arrival(ev.time); break;
            }
        }
        advance_clock(cfg_.duration);
        return finish();
    }

private:
    // --- bookkeeping -------------------------------------------------------

    void schedule(double time, EventType type, std::uint64_t target, std::uint64_t generation) {
        events_.push(Event{time, type, seq_++, target, generation});
    }

    void schedule_next_arrival() {
        const double t = workload_.next();
        if (t < cfg_.duration) schedule(t, EventType::Arrival, 0, 0);
    }

    double window_overlap(double from, double to) const noexcept {
        const double lo = std::max(from, cfg_.warmup);
        const double hi = std::min(to, cfg_.duration);
        return hi > lo ? hi - lo : 0.0;
    }

    void advance_clock(double t) {
        area_in_system_ += static_cast<double>(in_system_) * window_overlap(clock_, t);
        clock_ = t;
    }

    std::size_t add_server() {
        servers_.push_back(Server{});
        ++count(ServerState::Off);
        return servers_.size() - 1;
    }

    std::size_t& count(ServerState s) noexcept { return counts_[static_cast<std::size_t>(s)]; }

    void transition(std::size_t idx, ServerState to, double now) {
        Server& s = servers_[idx];
        const auto from_i = static_cast<std::size_t>(s.state);
        s.watt_seconds[from_i] += power_[from_i] * window_overlap(s.entered, now);
        if (observer_) observer_->on_server_state(now, idx, s.state, to);
        --count(s.state);
        ++count(to);
        s.state = to;
        s.entered = now;
        ++s.generation;
    }

    std::int64_t committed() const noexcept {
        const auto c = [&](ServerState s) { return counts_[static_cast<std::size_t>(s)]; };
        return static_cast<std::int64_t>(c(ServerState::SettingUp) + c(ServerState::Idle) + c(ServerState::Busy) -
                                         draining_);
    }

    // --- jobs --------------------------------------------------------------

    void start_service(std::size_t idx, double arrival, bool counted, double now) {
        transition(idx, ServerState::Busy, now);
        Server& s = servers_[idx];
        s.job_arrival = arrival;
        s.job_counted = counted;
        if (counted) {
            wait_served_sum_ += now - arrival;
            ++started_counted_;
        }
        schedule(now + service_rng_.exponential(cfg_.mu), EventType::Completion, idx, s.generation);
    }

    void drop_abandoned_front() {
        while (!queue_.empty() && queue_.front().abandoned) queue_.pop_front();
    }

    // Hand the longest-waiting job to server idx, or park it as Idle.
    void make_available(std::size_t idx, double now) {
        drop_abandoned_front();
        if (!queue_.empty()) {
            const Waiting job = queue_.front();
            queue_.pop_front();
            start_service(idx, job.arrival, job.counted, now);
            return;
        }
        transition(idx, ServerState::Idle, now);
        idle_.push_back(idx);
    }

    void on_arrival(double now) {
        const std::uint64_t id = next_job_++;
        const bool counted = now >= cfg_.warmup;
        if (counted) ++arrivals_;
        if (!epochs_.empty()) ++epochs_.back().arrivals;
        record_history(now);
        ++in_system_;

        const double deadline = cfg_.theta > 0.0 ? now + patience_rng_.exponential(cfg_.theta) : kInf;
        if (!idle_.empty()) {
            const std::size_t idx = idle_.back();
            idle_.pop_back();
            start_service(idx, now, counted, now);
        } else {
            queue_.push_back(Waiting{id, now, counted, false});
            if (deadline < cfg_.duration) schedule(deadline, EventType::Abandonment, id, 0);
        }
        schedule_next_arrival();
    }

    void on_completion(const Event& ev) {
        Server& s = servers_[ev.target];
        if (s.generation != ev.generation || s.state != ServerState::Busy) return;
        if (observer_) observer_->on_service_completion(ev.time, ev.target, s.state);
        --in_system_;
        if (s.job_counted) {
            ++served_;
            sojourn_sum_ += ev.time - s.job_arrival;
        }
        if (s.draining) {
            s.draining = false;
            --draining_;
            transition(ev.target, ServerState::Off, ev.time);
            return;
        }
        make_available(ev.target, ev.time);
    }

    void on_abandonment(const Event& ev) {
        auto it = std::lower_bound(queue_.begin(), queue_.end(), ev.target,
                                   [](const Waiting& w, std::uint64_t id) { return w.id < id; });
        if (it == queue_.end() || it->id != ev.target || it->abandoned) return;
        it->abandoned = true;
        --in_system_;
        if (it->counted) {
            ++abandoned_;
            sojourn_sum_ += ev.time - it->arrival;
        }
        if (!epochs_.empty()) ++epochs_.back().abandoned;
        drop_abandoned_front();
    }

    void on_setup_complete(const Event& ev) {
        const Server& s = servers_[ev.target];
        if (s.generation != ev.generation || s.state != ServerState::SettingUp) return;
        make_available(ev.target, ev.time);
    }

    // --- policy ------------------------------------------------------------

    void record_history(double now) {
        const auto bin = static_cast<std::size_t>(now / history_bin_);
        if (history_.size() <= bin) history_.resize(bin + 1, 0);
        ++history_[bin];
    }

    RateEstimate forecast(double now) {
        const Horizon next{now, now + policy_.epoch_length};
        const double truth = workload_.true_rate(next.start, next.end);
        auto completed = static_cast<std::size_t>(std::floor(now / history_bin_ + 1e-9));
        if (history_.size() < completed) history_.resize(completed, 0);
        const TraceView seen{history_bin_, 0.0, std::span(history_).first(completed)};

        EstimatorSpec spec = with_oracle_rate(policy_.estimator, truth);
        if (completed < required_history(spec)) spec = OracleEstimator{truth};
        return estimate(spec, seen, next);
    }

    void on_epoch(double now) {
        const RateEstimate est = forecast(now);
        const std::int64_t current = committed();
        const StaffingDecision d = decide_with_estimate(policy_, est, current, cfg_.mu, cfg_.theta, cfg_.econ);
        if (d.vetoed) ++vetoed_;

        EpochRecord row;
        row.time = now;
        row.n_target = d.target_servers;
        row.n_active = static_cast<std::int64_t>(count(ServerState::Idle) + count(ServerState::Busy));
        row.rate_estimate = est.rate;
        epochs_.push_back(row);

        if (d.target_servers > current) {
            ++scale_ups_;
            scale_up(d.target_servers - current, now);
        } else if (d.target_servers < current) {
            scale_down(current - d.target_servers, now);
        }

        const double next = now + policy_.epoch_length;
        if (next < cfg_.duration) schedule(next, EventType::PolicyEpoch, 0, 0);
    }

    void scale_up(std::int64_t need, double now) {
        // Cancelling a pending drain is free.
        for (std::size_t i = 0; i < servers_.size() && need > 0; ++i) {
            if (servers_[i].draining) {
                servers_[i].draining = false;
                --draining_;
                --need;
            }
        }
        for (std::size_t i = 0; need > 0; ++i) {
            if (i == servers_.size()) add_server();
            if (servers_[i].state != ServerState::Off) continue;
            --need;
            if (cfg_.econ.setup_duration <= 0.0) {
                make_available(i, now);
                continue;
            }
            transition(i, ServerState::SettingUp, now);
            schedule(now + cfg_.econ.setup_duration, EventType::SetupComplete, i, servers_[i].generation);
        }
    }

    void scale_down(std::int64_t excess, double now) {
        // Idle servers first, most recently idle first.
        while (excess > 0 && !idle_.empty()) {
            const std::size_t idx = idle_.back();
            idle_.pop_back();
            transition(idx, ServerState::Off, now);
            --excess;
        }
        // Then servers still booting, latest first.
        while (excess > 0) {
            std::size_t pick = servers_.size();
            for (std::size_t i = 0; i < servers_.size(); ++i)
                if (servers_[i].state == ServerState::SettingUp &&
                    (pick == servers_.size() || servers_[i].entered >= servers_[pick].entered))
                    pick = i;
            if (pick == servers_.size()) break;
            transition(pick, ServerState::Off, now);
            --excess;
        }
        // Busy servers power off when their job completes.
        for (std::size_t i = servers_.size(); i-- > 0 && excess > 0;) {
            Server& s = servers_[i];
            if (s.state == ServerState::Busy && !s.draining) {
                s.draining = true;
                ++draining_;
                --excess;
            }
        }
    }

    // --- wrap-up -----------------------------------------------------------

    SimResult finish() {
        SimResult r;
        for (std::size_t i = 0; i < servers_.size(); ++i) {
            Server& s = servers_[i];
            const auto st = static_cast<std::size_t>(s.state);
            s.watt_seconds[st] += power_[st] * window_overlap(s.entered, cfg_.duration);
            s.entered = cfg_.duration;
            for (std::size_t k = 0; k < 4; ++k) r.energy.watt_hours[k] += s.watt_seconds[k] / 3600.0;
        }
        if (observer_) observer_->on_finish(cfg_.duration);

        r.arrivals = arrivals_;
        r.served = served_;
        r.abandoned = abandoned_;
        r.in_system_at_end = arrivals_ - served_ - abandoned_;
        const double resolved = static_cast<double>(served_ + abandoned_);
        r.p_abandon = resolved > 0.0 ? static_cast<double>(abandoned_) / resolved : 0.0;
        r.mean_wait_served = started_counted_ > 0 ? wait_served_sum_ / static_cast<double>(started_counted_) : 0.0;
        r.mean_sojourn = resolved > 0.0 ? sojourn_sum_ / resolved : 0.0;
        r.mean_in_system = area_in_system_ / (cfg_.duration - cfg_.warmup);
        r.scale_up_events = scale_ups_;
        r.vetoed_scale_ups = vetoed_;
        const auto& e = cfg_.econ;
        r.net_revenue = e.reward_per_job * static_cast<double>(served_) -
                        e.abandon_penalty * static_cast<double>(abandoned_) -
                        e.electricity_price * r.energy_kwh();
        r.epochs = std::move(epochs_);
        return r;
    }

    const SimConfig& cfg_;
    const PolicySpec& policy_;
    SimObserver* observer_;
    WorkloadSource workload_;
    Rng service_rng_;
    Rng patience_rng_;
    std::array<double, 4> power_{};
    double history_bin_ = 1.0;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::uint64_t seq_ = 0;
    double clock_ = 0.0;

    std::vector<Server> servers_;
    std::array<std::size_t, 4> counts_{};
    std::size_t draining_ = 0;
    std::vector<std::size_t> idle_;
    std::deque<Waiting> queue_;
    std::uint64_t next_job_ = 0;
    std::uint64_t in_system_ = 0;

    std::vector<std::uint64_t> history_;
    std::vector<EpochRecord> epochs_;

    std::uint64_t arrivals_ = 0;
    std::uint64_t served_ = 0;
    std::uint64_t abandoned_ = 0;
    std::uint64_t started_counted_ = 0;
    double wait_served_sum_ = 0.0;
    double sojourn_sum_ = 0.0;
    double area_in_system_ = 0.0;
    std::uint64_t scale_ups_ = 0;
    std::uint64_t vetoed_ = 0;
};

}  // namespace

// --- workload ----------------------------------------------------------------

WorkloadSource::WorkloadSource(WorkloadSpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {
    std::visit(overloaded{
                   [](const StationaryWorkload& s) {
                       if (!(std::isfinite(s.rate) && s.rate >= 0.0))
                           fail(ErrorCode::InvalidParameter, "stationary arrival rate must be >= 0");
                   },
                   [](const TraceWorkload& t) {
                       if (!t.trace) fail(ErrorCode::EmptyTrace, "trace workload has no trace");
                   },
               },
               spec_);
}

double WorkloadSource::next() {
    if (const auto* s = std::get_if<StationaryWorkload>(&spec_)) {
        if (s->rate <= 0.0) return kInf;
        clock_ += rng_.exponential(s->rate);
        return clock_;
    }
    const auto& tw = std::get<TraceWorkload>(spec_);
    const ArrivalTrace& trace = *tw.trace;
    const double w = trace.bin_width();

    if (tw.mode == ReplayMode::Exact) {
        while (replay_.empty()) {
            if (bin_ >= trace.size()) return kInf;
            const double lo = static_cast<double>(bin_) * w;
            replay_.resize(trace.counts()[bin_]);
            for (double& t : replay_) t = rng_.uniform(lo, lo + w);
            std::sort(replay_.begin(), replay_.end(), std::greater<>());
            ++bin_;
        }
        const double t = replay_.back();
        replay_.pop_back();
        return t;
    }

    // Piecewise-constant Poisson; memorylessness lets each bin restart the clock.
    while (bin_ < trace.size()) {
        const double bin_end = static_cast<double>(bin_ + 1) * w;
        const double rate = trace.rate(bin_);
        if (rate > 0.0) {
            const double t = clock_ + rng_.exponential(rate);
            if (t < bin_end) {
                clock_ = t;
                return t;
            }
        }
        clock_ = bin_end;
        ++bin_;
    }
    return kInf;
}

double WorkloadSource::true_rate(double t0, double t1) const {
    if (const auto* s = std::get_if<StationaryWorkload>(&spec_)) return s->rate;
    return std::get<TraceWorkload>(spec_).trace->mean_rate(t0, t1);
}

double WorkloadSource::horizon() const noexcept {
    if (std::holds_alternative<StationaryWorkload>(spec_)) return kInf;
    return std::get<TraceWorkload>(spec_).trace->span();
}

double WorkloadSource::native_bin_width() const noexcept {
    if (std::holds_alternative<StationaryWorkload>(spec_)) return 0.0;
    return std::get<TraceWorkload>(spec_).trace->bin_width();
}

WorkloadSource make_workload(const WorkloadSpec& spec, std::uint64_t seed) { return WorkloadSource(spec, seed); }

const char* to_string(ServerState state) noexcept {
    switch (state) {
        case ServerState::Off: return "off";
        case ServerState::SettingUp: return "setting_up";
        case ServerState::Idle: return "idle";
        case ServerState::Busy: return "busy";
    }
    return "?";
}

// --- runs --------------------------------------------------------------------

void validate(const SimConfig& c) {
    if (!(std::isfinite(c.duration) && c.duration > 0.0))
        fail(ErrorCode::InvalidParameter, "duration must be finite and > 0");
    if (!(c.warmup >= 0.0 && c.warmup < c.duration))
        fail(ErrorCode::InvalidParameter, "warmup must lie in [0, duration)");
    if (!(std::isfinite(c.mu) && c.mu > 0.0)) fail(ErrorCode::InvalidParameter, "mu must be > 0");
    if (!(std::isfinite(c.theta) && c.theta >= 0.0)) fail(ErrorCode::InvalidParameter, "theta must be >= 0");
    if (c.initial_servers < 0) fail(ErrorCode::InvalidParameter, "initial_n must be >= 0");
    validate(c.econ);
}

SimResult run(const SimConfig& config, const WorkloadSpec& workload, const PolicySpec& policy,
              SimObserver* observer) {
    validate(config);
    validate(policy, config.econ);
    Simulation sim(config, workload, policy, observer);
    const WorkloadSource probe(workload, 0);
    if (probe.horizon() < config.duration)
        fail(ErrorCode::WorkloadExhausted, "trace covers " + std::to_string(probe.horizon()) +
                                               " s but the run lasts " + std::to_string(config.duration) + " s");
    return sim.execute();
}

MetricSummary summarize_metric(const std::vector<double>& values) {
    MetricSummary m;
    if (values.empty()) return m;
    double sum = 0.0;
    for (double v : values) sum += v;
    const auto n = static_cast<double>(values.size());
    m.mean = sum / n;
    if (values.size() < 2) return m;
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t dist(n - 1.0);
    m.half_width = boost::math::quantile(dist, 0.975) * sd / std::sqrt(n);
    return m;
}

ReplicationSummary summarize(std::vector<SimResult> runs) {
    ReplicationSummary s;
    const auto collect = [&](auto&& field) {
        std::vector<double> v;
        v.reserve(runs.size());
        for (const auto& r : runs) v.push_back(field(r));
        return summarize_metric(v);
    };
    s.arrivals = collect([](const SimResult& r) { return static_cast<double>(r.arrivals); });
    s.served = collect([](const SimResult& r) { return static_cast<double>(r.served); });
    s.abandoned = collect([](const SimResult& r) { return static_cast<double>(r.abandoned); });
    s.p_abandon = collect([](const SimResult& r) { return r.p_abandon; });
    s.energy_kwh = collect([](const SimResult& r) { return r.energy_kwh(); });
    s.net_revenue = collect([](const SimResult& r) { return r.net_revenue; });
    s.mean_wait_served = collect([](const SimResult& r) { return r.mean_wait_served; });
    s.runs = std::move(runs);
    return s;
}

ReplicationSummary run_replications(const SimConfig& config, const WorkloadSpec& workload,
                                    const PolicySpec& policy, std::size_t reps, bool parallel) {
    if (reps < 2) fail(ErrorCode::InvalidParameter, "replications need reps >= 2");
    validate(config);
    validate(policy, config.econ);
    const auto one = [&](std::size_t r) {
        SimConfig c = config;
        c.seed = replication_seed(config.seed, r);
        return run(c, workload, policy);
    };
    std::vector<SimResult> runs(reps);
    if (parallel) {
        std::vector<std::future<SimResult>> pending;
        pending.reserve(reps);
        for (std::size_t r = 0; r < reps; ++r) pending.push_back(std::async(std::launch::async, one, r));
        for (std::size_t r = 0; r < reps; ++r) runs[r] = pending[r].get();
    } else {
        for (std::size_t r = 0; r < reps; ++r) runs[r] = one(r);
    }
    return summarize(std::move(runs));
}

}  // namespace ecofarm
