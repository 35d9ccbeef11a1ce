#pragma once

// Portable, bit-exact random streams.
//
// Generator: xoshiro256** (Blackman & Vigna), state seeded by four
// consecutive splitmix64 outputs. Every draw used by the simulator goes
// through the helpers below so that a given seed produces the same
// numbers on any platform and in any language that reimplements them:
//
//   uniform01()      (next() >> 11) * 2^-53
//   uniform_int(n)   rejection on next() below (2^64 - n) mod n, then mod n
//   bernoulli(p)     uniform01() < p
//
// Independent substreams (one per episode, one per role) are derived as
// seed' = mix64(seed ^ mix64(stream_index)), with mix64 the splitmix64
// finalizer.

#include <array>
#include <cstdint>

namespace rema {

/// splitmix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed ^ mix64(stream));
}

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9E3779B97F4A7C15ULL;
            word = mix64(sm);
        }
    }

    static Rng substream(std::uint64_t seed, std::uint64_t stream) noexcept {
        return Rng(substream_seed(seed, stream));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept { return next(); }

    std::uint64_t next() noexcept {
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

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Unbiased uniform integer on [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) noexcept {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    bool bernoulli(double p) noexcept { return uniform01() < p; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace rema
