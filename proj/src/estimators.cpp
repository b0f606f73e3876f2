#include "ecofarm/estimators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include "ecofarm/error.hpp"

namespace ecofarm {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::size_t required_base(const BaseEstimator& base) noexcept {
    return std::visit(overloaded{
                          [](const OracleEstimator&) -> std::size_t { return 0; },
                          [](const WindowEstimator& w) { return w.bins; },
                          [](const EwmaEstimator&) -> std::size_t { return 1; },
                          [](const TrendEstimator& t) { return t.bins; },
                      },
                      base);
}

void validate_base(const BaseEstimator& base) {
    std::visit(overloaded{
                   [](const OracleEstimator& o) {
                       if (o.rate && !(std::isfinite(*o.rate) && *o.rate >= 0.0))
                           fail(ErrorCode::InvalidParameter, "oracle rate must be finite and >= 0");
                   },
                   [](const WindowEstimator& w) {
                       if (w.bins < 1) fail(ErrorCode::InvalidParameter, "window needs at least 1 bin");
                   },
                   [](const EwmaEstimator& e) {
                       if (!(e.alpha > 0.0 && e.alpha <= 1.0))
                           fail(ErrorCode::InvalidParameter, "ewma alpha must lie in (0, 1]");
                   },
                   [](const TrendEstimator& t) {
                       if (t.bins < 2) fail(ErrorCode::InvalidParameter, "trend needs at least 2 bins");
                   },
               },
               base);
}

double window_rate(TraceView h, std::size_t bins) {
    double sum = 0.0;
    for (std::size_t i = h.size() - bins; i < h.size(); ++i) sum += h.rate(i);
    return sum / static_cast<double>(bins);
}

double ewma_rate(TraceView h, double alpha) {
    double s = h.rate(0);
    for (std::size_t i = 1; i < h.size(); ++i) s = alpha * h.rate(i) + (1.0 - alpha) * s;
    return s;
}

double trend_rate(TraceView h, std::size_t bins, double target_time) {
    // Abscissae are bin midpoints, centred on their mean for conditioning.
    const std::size_t first = h.size() - bins;
    double x_mean = 0.0;
    double y_mean = 0.0;
    for (std::size_t i = first; i < h.size(); ++i) {
        x_mean += h.bin_start(i) + 0.5 * h.bin_width;
        y_mean += h.rate(i);
    }
    x_mean /= static_cast<double>(bins);
    y_mean /= static_cast<double>(bins);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = first; i < h.size(); ++i) {
        const double dx = h.bin_start(i) + 0.5 * h.bin_width - x_mean;
        sxx += dx * dx;
        sxy += dx * (h.rate(i) - y_mean);
    }
    const double slope = sxy / sxx;
    return std::max(0.0, y_mean + slope * (target_time - x_mean));
}

double base_rate(const BaseEstimator& base, TraceView h, Horizon next) {
    return std::visit(overloaded{
                          [](const OracleEstimator& o) {
                              if (!o.rate)
                                  fail(ErrorCode::InvalidParameter, "oracle estimator has no configured rate");
                              return *o.rate;
                          },
                          [&](const WindowEstimator& w) { return window_rate(h, w.bins); },
                          [&](const EwmaEstimator& e) { return ewma_rate(h, e.alpha); },
                          [&](const TrendEstimator& t) {
                              return trend_rate(h, t.bins, 0.5 * (next.start + next.end));
                          },
                      },
                      base);
}

std::string format_number(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
    T value{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        fail(ErrorCode::Parse, "bad " + std::string(what) + " parameter '" + std::string(text) + "'");
    return value;
}

std::vector<std::string_view> split(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    for (;;) {
        auto colon = text.find(':', pos);
        parts.push_back(text.substr(pos, colon - pos));
        if (colon == std::string_view::npos) break;
        pos = colon + 1;
    }
    return parts;
}

BaseEstimator parse_base(std::span<const std::string_view> parts, std::string_view text) {
    const std::string_view kind = parts[0];
    if (parts.size() > 2) fail(ErrorCode::Parse, "too many fields in estimator '" + std::string(text) + "'");
    const bool has_arg = parts.size() == 2;
    if (kind == "oracle") {
        OracleEstimator o;
        if (has_arg) o.rate = parse_number<double>(parts[1], "oracle rate");
        return o;
    }
    if (kind == "window") {
        WindowEstimator w;
        if (has_arg) w.bins = parse_number<std::size_t>(parts[1], "window size");
        return w;
    }
    if (kind == "ewma") {
        EwmaEstimator e;
        if (has_arg) e.alpha = parse_number<double>(parts[1], "ewma alpha");
        return e;
    }
    if (kind == "trend") {
        TrendEstimator t;
        if (has_arg) t.bins = parse_number<std::size_t>(parts[1], "trend window");
        return t;
    }
    fail(ErrorCode::Parse, "unknown estimator '" + std::string(text) + "'");
}

std::string format_base(const BaseEstimator& base) {
    return std::visit(overloaded{
                          [](const OracleEstimator& o) {
                              return o.rate ? "oracle:" + format_number(*o.rate) : std::string("oracle");
                          },
                          [](const WindowEstimator& w) { return "window:" + std::to_string(w.bins); },
                          [](const EwmaEstimator& e) { return "ewma:" + format_number(e.alpha); },
                          [](const TrendEstimator& t) { return "trend:" + std::to_string(t.bins); },
                      },
                      base);
}

}  // namespace

void validate(const EstimatorSpec& spec) {
    if (const auto* m = std::get_if<MarginEstimator>(&spec)) {
        if (!(std::isfinite(m->k) && m->k >= 0.0))
            fail(ErrorCode::InvalidParameter, "margin k must be finite and >= 0");
        validate_base(m->base);
        return;
    }
    std::visit(overloaded{
                   [](const MarginEstimator&) {},
                   [](const auto& base) { validate_base(BaseEstimator{base}); },
               },
               spec);
}

std::size_t required_history(const EstimatorSpec& spec) noexcept {
    return std::visit(overloaded{
                          [](const MarginEstimator& m) { return required_base(m.base); },
                          [](const auto& base) { return required_base(BaseEstimator{base}); },
                      },
                      spec);
}

RateEstimate estimate(const EstimatorSpec& spec, TraceView history, Horizon next_epoch) {
    validate(spec);
    if (!(next_epoch.end > next_epoch.start))
        fail(ErrorCode::InvalidParameter, "estimation horizon must have positive length");
    const std::size_t need = required_history(spec);
    if (need > 0 && history.empty()) fail(ErrorCode::EmptyTrace, "estimator history is empty");
    if (history.size() < need)
        fail(ErrorCode::InsufficientHistory, "estimator needs " + std::to_string(need) + " bins of history, got " +
                                                 std::to_string(history.size()));
    if (!history.empty() && next_epoch.start < history.end_time() - 1e-9 * history.bin_width)
        fail(ErrorCode::InvalidParameter, "estimation horizon starts before the end of the history");

    double rate = std::visit(overloaded{
                                 [&](const MarginEstimator& m) {
                                     const double r = base_rate(m.base, history, next_epoch);
                                     return r + m.k * std::sqrt(r / history.bin_width);
                                 },
                                 [&](const auto& base) { return base_rate(BaseEstimator{base}, history, next_epoch); },
                             },
                             spec);
    return RateEstimate{std::max(0.0, rate), next_epoch.start, next_epoch.end};
}

EstimatorSpec with_oracle_rate(const EstimatorSpec& spec, double true_rate) {
    EstimatorSpec out = spec;
    if (auto* o = std::get_if<OracleEstimator>(&out); o && !o->rate) o->rate = true_rate;
    if (auto* m = std::get_if<MarginEstimator>(&out))
        if (auto* o = std::get_if<OracleEstimator>(&m->base); o && !o->rate) o->rate = true_rate;
    return out;
}

bool needs_oracle_rate(const EstimatorSpec& spec) noexcept {
    if (const auto* o = std::get_if<OracleEstimator>(&spec)) return !o->rate;
    if (const auto* m = std::get_if<MarginEstimator>(&spec))
        if (const auto* o = std::get_if<OracleEstimator>(&m->base)) return !o->rate;
    return false;
}

EstimatorReport evaluate_estimator(const EstimatorSpec& spec, TraceView trace) {
    validate(spec);
    if (trace.empty()) fail(ErrorCode::EmptyTrace, "cannot evaluate an estimator on an empty trace");
    EstimatorReport report;
    report.warmup_bins = std::max<std::size_t>(1, required_history(spec));
    if (trace.size() <= report.warmup_bins)
        fail(ErrorCode::InsufficientHistory, "trace of " + std::to_string(trace.size()) +
                                                 " bins leaves nothing to score after a warm-up of " +
                                                 std::to_string(report.warmup_bins));

    // Fixed-order reduction keeps the aggregate bit-reproducible.
    double sq = 0.0;
    double bias = 0.0;
    double ape = 0.0;
    std::size_t ape_bins = 0;
    for (std::size_t t = report.warmup_bins; t < trace.size(); ++t) {
        const Horizon target{trace.bin_start(t), trace.bin_start(t + 1)};
        const double predicted = estimate(spec, trace.prefix(t), target).rate;
        const double actual = trace.rate(t);
        const double err = predicted - actual;
        sq += err * err;
        bias += err;
        if (actual > 0.0) {
            ape += std::abs(err) / actual;
            ++ape_bins;
        }
    }
    report.scored_bins = trace.size() - report.warmup_bins;
    const auto scored = static_cast<double>(report.scored_bins);
    report.rmse = std::sqrt(sq / scored);
    report.mean_bias = bias / scored;
    report.mape_percent = ape_bins > 0 ? 100.0 * ape / static_cast<double>(ape_bins) : 0.0;
    return report;
}

EstimatorSpec parse_estimator(std::string_view text) {
    const auto parts = split(text);
    if (parts[0] == "margin") {
        if (parts.size() < 3) fail(ErrorCode::Parse, "margin estimator needs 'margin:K:<base>'");
        MarginEstimator m;
        m.k = parse_number<double>(parts[1], "margin k");
        if (parts[2] == "margin") fail(ErrorCode::Parse, "margin estimators cannot be nested");
        m.base = parse_base(std::span(parts).subspan(2), text);
        validate(m);
        return m;
    }
    EstimatorSpec spec = std::visit([](const auto& b) -> EstimatorSpec { return b; }, parse_base(parts, text));
    validate(spec);
    return spec;
}

std::string format_estimator(const EstimatorSpec& spec) {
    return std::visit(overloaded{
                          [](const MarginEstimator& m) { return "margin:" + format_number(m.k) + ":" + format_base(m.base); },
                          [](const auto& base) { return format_base(BaseEstimator{base}); },
                      },
                      spec);
}

}  // namespace ecofarm
