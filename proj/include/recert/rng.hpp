#pragma once

#include <cmath>
#include <cstdint>

namespace recert {

// 64-bit finalizer used both as the SplitMix64 output function and as the
// stream-derivation mixer. Hex constants are the standard SplitMix64 ones.
inline std::uint64_t avalanche64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives a child stream seed from (seed, tag). Chained calls give nested
// streams: mix_stream(mix_stream(seed, a), b). The output is independent of
// any scheduling, so parallel workers on (seed, index) streams reproduce the
// serial result bit for bit.
inline std::uint64_t mix_stream(std::uint64_t seed, std::uint64_t tag) {
    return avalanche64(seed ^ (0x9e3779b97f4a7c15ULL + avalanche64(tag + 0x632be59bd9b4e019ULL)));
}

// SplitMix64 counter generator.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return avalanche64(state_);
    }

    // Uniform in [0, 1), 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; one value per two uniforms so the
    // stream position is a fixed function of the draw count.
    double next_gaussian() {
        double u1 = 1.0 - next_unit();  // (0, 1]
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double next_sign() { return (next_u64() >> 63) ? -1.0 : 1.0; }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t next_below(std::uint64_t n) {
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace recert
