#pragma once

// SplitMix64 (Steele/Lea/Flood; Vigna's fixed-increment variant).
// Chosen because the whole generator is a handful of integer ops that any
// language reproduces bit-for-bit. First output for state 0 is the canonical
// test vector 0xE220A8397B1DCDAF.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace m3 {

inline constexpr std::uint64_t kSplitmixGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

// Advances the stream by one draw: new_state = state + gamma, value = mix(new_state).
constexpr std::pair<std::uint64_t, std::uint64_t> prng_next(std::uint64_t state) {
    const std::uint64_t new_state = state + kSplitmixGamma;
    return {mix64(new_state), new_state};
}

// 53-bit uniform in [0,1).
constexpr double to_unit_real(std::uint64_t value) {
    return static_cast<double>(value >> 11) * 0x1.0p-53;
}

class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

    constexpr std::uint64_t next_u64() {
        auto [value, new_state] = prng_next(state_);
        state_ = new_state;
        return value;
    }

    constexpr double next_uniform() { return to_unit_real(next_u64()); }

    // Box-Muller, cosine branch only: one gaussian per two consecutive
    // uniforms; u1 == 0 is replaced by 2^-53 so the log stays finite.
    double next_gaussian() {
        double u1 = next_uniform();
        const double u2 = next_uniform();
        if (u1 == 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    constexpr std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace m3
