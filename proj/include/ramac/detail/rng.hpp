#pragma once

#include <cstdint>

namespace ramac::detail {

/// SplitMix64 step (Steele/Lea/Flood). Used for seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256** (Blackman/Vigna), a fixed platform-independent 64-bit
/// generator. Streams are derived deterministically from (seed, stream):
/// the four state words are successive SplitMix64 outputs seeded with
/// seed XOR (stream+1)*0xD1B54A32D192ED03.
class Xoshiro256 {
public:
    Xoshiro256(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t sm = seed ^ ((stream + 1) * 0xD1B54A32D192ED03ull);
        for (auto& w : state_) w = splitmix64(sm);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, bound) via 128-bit multiply-shift.
    /// Bias is below bound*2^-64, negligible for channel counts.
    std::uint32_t below(std::uint32_t bound) {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace ramac::detail
