#pragma once

#include <cstdint>
#include <initializer_list>

namespace mclearn {

// Deterministic counter-based generator built on splitmix64.  Every consumer
// derives its own stream from (seed, path...) so results do not depend on how
// many draws other components made, which thread ran first, or stdlib
// distribution internals.  That property carries the bit-reproducibility
// guarantees (equal seeds -> equal models, byte-equal CSV, thread-count
// independence).
class Rng {
public:
    Rng() : state_(0x9e3779b97f4a7c15ull) {}
    explicit Rng(std::uint64_t seed) : state_(mix(seed + 0x9e3779b97f4a7c15ull)) {}

    // Child stream keyed by a path of integers, e.g. {kGa, z, gen, i}.
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        Rng r(seed);
        for (std::uint64_t p : path) {
            r.state_ = mix(r.state_ ^ (p + 0x9e3779b97f4a7c15ull));
        }
        return r;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform in [0, n) without modulo bias.
    std::uint64_t next_below(std::uint64_t n) {
        // Rejection sampling on the top of the range.
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

    int next_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Uniform double in [0, 1): 53 random bits scaled.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in (0, 1]; safe as a positive weight or for -log draws.
    double next_positive() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

// Stream tags for Rng::derive paths.  Central list so no two call sites
// collide on a tag.
namespace stream {
inline constexpr std::uint64_t kSample    = 1;
inline constexpr std::uint64_t kRandGen   = 2;
inline constexpr std::uint64_t kGaInit    = 3;
inline constexpr std::uint64_t kGaSelect  = 4;
inline constexpr std::uint64_t kGaCross   = 5;
inline constexpr std::uint64_t kGaMutate  = 6;
inline constexpr std::uint64_t kSmc       = 7;
inline constexpr std::uint64_t kHarness   = 8;
} // namespace stream

} // namespace mclearn
