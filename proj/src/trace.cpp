#include "ecofarm/trace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecofarm/error.hpp"

namespace ecofarm {

ArrivalTrace::ArrivalTrace(double bin_width, double start_time, std::vector<std::uint64_t> counts)
    : bin_width_(bin_width), start_time_(start_time), counts_(std::move(counts)) {
    if (!std::isfinite(bin_width_) || bin_width_ <= 0.0)
        fail(ErrorCode::InvalidParameter, "trace bin width must be > 0");
    if (!std::isfinite(start_time_)) fail(ErrorCode::InvalidParameter, "trace start time must be finite");
    if (counts_.empty()) fail(ErrorCode::EmptyTrace, "trace has no bins");
}

std::uint64_t ArrivalTrace::total() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

double ArrivalTrace::mean_rate(double t0, double t1) const noexcept {
    const double stop = std::min(t1, span());
    if (!(stop > t0)) return 0.0;
    double events = 0.0;
    auto first = static_cast<std::size_t>(std::max(0.0, std::floor(t0 / bin_width_)));
    for (std::size_t i = first; i < counts_.size(); ++i) {
        const double lo = std::max(t0, static_cast<double>(i) * bin_width_);
        const double hi = std::min(stop, static_cast<double>(i + 1) * bin_width_);
        if (hi <= lo) {
            if (lo >= stop) break;
            continue;
        }
        events += rate(i) * (hi - lo);
    }
    return events / (stop - t0);
}

}  // namespace ecofarm
