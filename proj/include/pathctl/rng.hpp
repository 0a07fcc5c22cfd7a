#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pathctl {

/// Stateless counter-based random numbers.
///
/// Every draw is a pure function of a key (seed, stream, substream, counter),
/// so results do not depend on evaluation order or on how work is split
/// across threads. The mixer is two rounds of the SplitMix64 finalizer over
/// a Weyl-combined key.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    constexpr std::uint64_t seed() const noexcept { return seed_; }

    /// Seed for a nested estimator. Children of distinct (a, b) never collide
    /// with each other or with the parent in practice.
    constexpr CounterRng child(std::uint64_t a, std::uint64_t b = 0) const noexcept {
        return CounterRng(bits(0xC0FFEEULL, a, b, 0x5EEDULL));
    }

    constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t sub,
                                 std::uint64_t counter, std::uint64_t lane = 0) const noexcept {
        std::uint64_t h = mix(seed_ ^ 0x9E3779B97F4A7C15ULL);
        h = mix(h + stream * 0xD1B54A32D192ED03ULL);
        h = mix(h + sub * 0xABC98388FB8FAC03ULL);
        h = mix(h + counter * 0x8CB92BA72F3D8DD7ULL);
        return mix(h + lane * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t stream, std::uint64_t sub, std::uint64_t counter,
                   std::uint64_t lane = 0) const noexcept {
        return (static_cast<double>(bits(stream, sub, counter, lane) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller on two independent uniforms.
    double normal(std::uint64_t stream, std::uint64_t sub, std::uint64_t counter) const noexcept {
        const double u1 = uniform(stream, sub, counter, 1);
        const double u2 = uniform(stream, sub, counter, 2);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace pathctl
