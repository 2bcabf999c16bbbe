#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace dauval {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based random stream. Draw number `i` of stream `(seed, stream_id)` is a pure
/// function of those three values, so parallel consumers of distinct streams produce the
/// same numbers regardless of scheduling. Satisfies UniformRandomBitGenerator.
class CounterStream {
public:
    using result_type = std::uint64_t;

    CounterStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
        : key_(mix64(mix64(seed) ^ mix64(stream_id + 0x632be59bd9b4e019ULL))) {}

    /// Derives an independent child stream, e.g. (scenario, purpose).
    CounterStream substream(std::uint64_t id) const noexcept { return CounterStream(key_, id); }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type at(std::uint64_t index) const noexcept { return mix64(key_ ^ mix64(index)); }
    result_type operator()() noexcept { return at(counter_++); }

    std::uint64_t draws() const noexcept { return counter_; }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased (rejection on the short tail).
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t x;
        do {
            x = (*this)();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (one value per two draws).
    double normal() noexcept {
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace dauval
