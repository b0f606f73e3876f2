#include "ecofarm/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ecofarm/error.hpp"

namespace ecofarm {
namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
    fail(ErrorCode::Parse, "line " + std::to_string(line) + ": " + what);
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <class T>
bool parse_exact(std::string_view text, T& out) {
    if (text.empty()) return false;
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    return in;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

ArrivalTrace parse_binned(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::EmptyTrace, "binned trace is empty (no header)");
    strip_cr(line);
    if (line != "timestamp,count") parse_error(1, "expected header 'timestamp,count'");

    std::vector<double> stamps;
    std::vector<std::uint64_t> counts;
    std::size_t lineno = 1;
    bool blank_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) {
            blank_seen = true;
            continue;
        }
        if (blank_seen) parse_error(lineno - 1, "blank line inside the trace");
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            parse_error(lineno, "expected exactly two fields");
        const std::string_view sv(line);
        double stamp = 0.0;
        std::int64_t count = 0;
        if (!parse_exact(sv.substr(0, comma), stamp) || !std::isfinite(stamp))
            parse_error(lineno, "bad timestamp '" + std::string(sv.substr(0, comma)) + "'");
        if (!parse_exact(sv.substr(comma + 1), count))
            parse_error(lineno, "bad count '" + std::string(sv.substr(comma + 1)) + "'");
        if (count < 0)
            fail(ErrorCode::NegativeCount, "line " + std::to_string(lineno) + ": negative count " +
                                               std::to_string(count));
        stamps.push_back(stamp);
        counts.push_back(static_cast<std::uint64_t>(count));
    }
    if (counts.empty()) fail(ErrorCode::EmptyTrace, "binned trace has no rows");
    if (counts.size() < 2) fail(ErrorCode::NonUniformBinning, "cannot infer the bin width from a single row");

    const double width = stamps[1] - stamps[0];
    if (!(width > 0.0)) fail(ErrorCode::NonUniformBinning, "timestamps must be strictly increasing");
    for (std::size_t i = 2; i < stamps.size(); ++i) {
        const double expected = stamps[0] + static_cast<double>(i) * width;
        if (std::abs(stamps[i] - expected) > 1e-6 * width)
            fail(ErrorCode::NonUniformBinning, "line " + std::to_string(i + 2) + ": timestamp " +
                                                   std::to_string(stamps[i]) + " breaks the bin width " +
                                                   std::to_string(width));
    }
    return ArrivalTrace(width, stamps[0], std::move(counts));
}

ArrivalTrace load_binned(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    return parse_binned(in);
}

void write_binned(const ArrivalTrace& trace, std::ostream& out) {
    out << "timestamp,count\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double t = trace.start_time() + static_cast<double>(i) * trace.bin_width();
        auto res = std::to_chars(buf, buf + sizeof buf, t);
        out.write(buf, res.ptr - buf);
        out << ',' << trace.counts()[i] << '\n';
    }
}

void save_binned(const ArrivalTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    write_binned(trace, out);
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

ArrivalTrace aggregate_log(std::istream& in, double bin_width) {
    const double width_ms_real = bin_width * 1000.0;
    const auto width_ms = static_cast<std::int64_t>(std::llround(width_ms_real));
    if (!(std::isfinite(bin_width) && width_ms >= 1 && std::abs(width_ms_real - static_cast<double>(width_ms)) < 1e-6))
        fail(ErrorCode::InvalidParameter, "bin width must be a positive whole number of milliseconds");

    std::vector<std::int64_t> stamps;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) continue;
        const auto end = line.find_first_of(" \t");
        std::int64_t ms = 0;
        if (!parse_exact(std::string_view(line).substr(0, end), ms))
            parse_error(lineno, "expected an integer epoch-millisecond timestamp");
        stamps.push_back(ms);
    }
    if (stamps.empty()) fail(ErrorCode::EmptyTrace, "log contains no timestamps");

    std::sort(stamps.begin(), stamps.end());
    const std::int64_t start = floor_div(stamps.front(), width_ms) * width_ms;
    const auto bins = static_cast<std::size_t>((stamps.back() - start) / width_ms + 1);
    std::vector<std::uint64_t> counts(bins, 0);
    for (std::int64_t ms : stamps) ++counts[static_cast<std::size_t>((ms - start) / width_ms)];
    return ArrivalTrace(bin_width, static_cast<double>(start) / 1000.0, std::move(counts));
}

ArrivalTrace aggregate_log(const std::filesystem::path& path, double bin_width) {
    auto in = open_for_read(path);
    return aggregate_log(in, bin_width);
}

ArrivalTrace synthesize_diurnal(const DiurnalShape& shape, double bin_width, std::size_t bins,
                                std::optional<std::uint64_t> noise_seed, double start_time) {
    if (!(bin_width > 0.0) || !(shape.period > 0.0))
        fail(ErrorCode::InvalidParameter, "bin width and period must be > 0");
    if (bins == 0) fail(ErrorCode::EmptyTrace, "synthetic trace needs at least one bin");
    std::mt19937_64 engine(noise_seed.value_or(0));
    std::vector<std::uint64_t> counts(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        const double mid = (static_cast<double>(i) + 0.5) * bin_width;
        const double rate =
            shape.base_rate + shape.amplitude * std::sin(2.0 * std::numbers::pi * (mid / shape.period + shape.phase));
        const double mean = std::max(0.0, rate) * bin_width;
        if (noise_seed && mean > 0.0) {
            std::poisson_distribution<std::uint64_t> draw(mean);
            counts[i] = draw(engine);
        } else {
            counts[i] = static_cast<std::uint64_t>(std::llround(mean));
        }
    }
    return ArrivalTrace(bin_width, start_time, std::move(counts));
}

}  // namespace ecofarm
