#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ecofarm {

/// Non-owning view over a uniformly binned run of request counts.
struct TraceView {
    double bin_width = 1.0;
    double start_time = 0.0;
    std::span<const std::uint64_t> counts;

    std::size_t size() const noexcept { return counts.size(); }
    bool empty() const noexcept { return counts.empty(); }
    double rate(std::size_t bin) const noexcept { return static_cast<double>(counts[bin]) / bin_width; }
    double bin_start(std::size_t bin) const noexcept {
        return start_time + static_cast<double>(bin) * bin_width;
    }
    double end_time() const noexcept { return bin_start(counts.size()); }

    /// The first `bins` bins.
    TraceView prefix(std::size_t bins) const noexcept {
        return TraceView{bin_width, start_time, counts.first(bins)};
    }
};

/// Uniformly binned request counts. Immutable after construction.
class ArrivalTrace {
public:
    /// Throws InvalidParameter for a non-positive bin width, EmptyTrace for no bins.
    ArrivalTrace(double bin_width, double start_time, std::vector<std::uint64_t> counts);

    double bin_width() const noexcept { return bin_width_; }
    double start_time() const noexcept { return start_time_; }
    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    std::size_t size() const noexcept { return counts_.size(); }
    double rate(std::size_t bin) const noexcept { return view().rate(bin); }
    double end_time() const noexcept { return view().end_time(); }
    double span() const noexcept { return bin_width_ * static_cast<double>(counts_.size()); }
    std::uint64_t total() const noexcept;

    TraceView view() const noexcept { return TraceView{bin_width_, start_time_, counts_}; }

    /// Mean rate over [t0, t1) in trace-relative seconds (0 = start_time);
    /// the part of the interval past the trace end is ignored.
    double mean_rate(double t0, double t1) const noexcept;

    friend bool operator==(const ArrivalTrace&, const ArrivalTrace&) = default;

private:
    double bin_width_;
    double start_time_;
    std::vector<std::uint64_t> counts_;
};

}  // namespace ecofarm
