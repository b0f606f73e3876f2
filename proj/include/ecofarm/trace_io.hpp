#pragma once

// Binned CSV: header `timestamp,count`, one row per bin, timestamps in epoch
// seconds with uniform spacing. Raw logs: one integer epoch-millisecond
// timestamp leading each line; anything after whitespace is ignored.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "ecofarm/trace.hpp"

namespace ecofarm {

ArrivalTrace load_binned(const std::filesystem::path& path);
ArrivalTrace parse_binned(std::istream& in);

void save_binned(const ArrivalTrace& trace, const std::filesystem::path& path);
void write_binned(const ArrivalTrace& trace, std::ostream& out);

ArrivalTrace aggregate_log(const std::filesystem::path& path, double bin_width);
ArrivalTrace aggregate_log(std::istream& in, double bin_width);

/// Sinusoidal day/night load: rate(t) = base + amplitude*sin(2*pi*(t/period + phase)).
struct DiurnalShape {
    double base_rate = 100.0;
    double amplitude = 50.0;
    double period = 86400.0;
    double phase = 0.0;  // in periods
};

/// Bin i gets rate(midpoint_i) * bin_width requests, rounded, or a Poisson
/// draw with that mean when `noise_seed` is set.
ArrivalTrace synthesize_diurnal(const DiurnalShape& shape, double bin_width, std::size_t bins,
                                std::optional<std::uint64_t> noise_seed = std::nullopt, double start_time = 0.0);

}  // namespace ecofarm
