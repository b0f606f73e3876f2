#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ecofarm {

/// SplitMix64 finalizer; the seeding rule for every stream.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Purpose tags for independent streams inside one replication.
enum class Stream : std::uint64_t {
    Arrivals = 0xA5A5'0001,
    Service = 0xA5A5'0002,
    Patience = 0xA5A5'0003,
};

/// Seed of replication r: seed xor r, mixed.
constexpr std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t rep) noexcept {
    return splitmix64(seed ^ rep);
}

constexpr std::uint64_t stream_seed(std::uint64_t rep_seed, Stream stream) noexcept {
    return splitmix64(splitmix64(rep_seed) ^ static_cast<std::uint64_t>(stream));
}

/// mt19937_64 with hand-rolled variates so sample paths do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Exp(rate) by inversion.
    double exponential(double rate) noexcept { return -std::log1p(-uniform()) / rate; }

private:
    std::mt19937_64 engine_;
};

}  // namespace ecofarm
