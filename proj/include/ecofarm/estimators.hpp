#pragma once

// Arrival-rate estimation and forecasting from binned request counts.
// Estimators operate on bin rates (count / bin_width), never raw counts.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "ecofarm/trace.hpp"

namespace ecofarm {

/// Known rate. Without a configured rate the simulator substitutes the
/// workload's true mean rate over the target epoch.
struct OracleEstimator {
    std::optional<double> rate;
};

/// Mean of the last `bins` bin rates.
struct WindowEstimator {
    std::size_t bins = 5;
};

/// Exponential smoothing over the whole history, seeded with the first rate.
struct EwmaEstimator {
    double alpha = 0.3;
};

/// Least-squares line over the last `bins` rates, extrapolated to the middle
/// of the target epoch and clamped at zero.
struct TrendEstimator {
    std::size_t bins = 5;
};

using BaseEstimator = std::variant<OracleEstimator, WindowEstimator, EwmaEstimator, TrendEstimator>;

/// Base estimate plus `k` Poisson standard deviations: rate + k*sqrt(rate/bin_width).
struct MarginEstimator {
    BaseEstimator base = WindowEstimator{};
    double k = 1.0;
};

using EstimatorSpec =
    std::variant<OracleEstimator, WindowEstimator, EwmaEstimator, TrendEstimator, MarginEstimator>;

struct Horizon {
    double start = 0.0;
    double end = 0.0;
};

struct RateEstimate {
    double rate = 0.0;
    double horizon_start = 0.0;
    double horizon_end = 0.0;
};

struct EstimatorReport {
    std::size_t scored_bins = 0;
    std::size_t warmup_bins = 0;
    double mape_percent = 0.0;  // zero-rate bins skipped
    double rmse = 0.0;
    double mean_bias = 0.0;     // mean of (estimate - actual)
};

void validate(const EstimatorSpec& spec);

/// Bins of history the estimator needs before it can produce an estimate.
std::size_t required_history(const EstimatorSpec& spec) noexcept;

/// Forecast the arrival rate over `next_epoch` from `history`. Throws
/// EmptyTrace or InsufficientHistory when the history is too short.
RateEstimate estimate(const EstimatorSpec& spec, TraceView history, Horizon next_epoch);

/// Fill in an unset oracle rate (also inside a margin).
EstimatorSpec with_oracle_rate(const EstimatorSpec& spec, double true_rate);

/// True when the spec is an oracle (possibly wrapped) without a configured rate.
bool needs_oracle_rate(const EstimatorSpec& spec) noexcept;

/// Walk-forward evaluation: bin t is predicted from bins [0, t) only and
/// scored against its realized rate. The first required_history bins (at
/// least one) are warm-up.
EstimatorReport evaluate_estimator(const EstimatorSpec& spec, TraceView trace);

/// Compact form used on the command line: "oracle:R", "window:W", "ewma:A",
/// "trend:W", "margin:K:<base>". Parameters may be omitted to take defaults.
EstimatorSpec parse_estimator(std::string_view text);
std::string format_estimator(const EstimatorSpec& spec);

}  // namespace ecofarm
