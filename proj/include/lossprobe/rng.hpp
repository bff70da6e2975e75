// rng.hpp — seedable, platform-stable random number generation.
//
// std::uniform_real_distribution and friends are implementation-defined, so
// every draw in this library goes through the generators below.  Walk traces
// then reproduce bit-for-bit on any machine given the same seed.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lossprobe {

// SplitMix64 step; used for seeding and stream derivation.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256++ (Blackman & Vigna).  64-bit state words seeded via SplitMix64.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    // Independent stream for a (seed, stream_id) pair.  Used to give every
    // walk its own generator regardless of scheduling order.
    static Xoshiro256pp for_stream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t sm = seed;
        std::uint64_t a = splitmix64_next(sm);
        std::uint64_t mix = a ^ (stream_id * 0xD1342543DE82EF95ULL + 0x632BE59BD9B4E019ULL);
        return Xoshiro256pp(splitmix64_next(mix));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, bound); rejection on the top of the range.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Xoshiro256pp::below: bound must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return r % bound;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
};

// k distinct indices drawn from [0, population) by partial Fisher-Yates.
// Order of selection is preserved, so results are seed-deterministic.
inline std::vector<std::size_t> sample_indices(std::size_t population, std::size_t k,
                                               Xoshiro256pp& rng) {
    if (k > population)
        throw std::invalid_argument("sample_indices: k exceeds population size");
    std::vector<std::size_t> pool(population);
    for (std::size_t i = 0; i < population; ++i) pool[i] = i;
    std::vector<std::size_t> picked(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
        std::swap(pool[i], pool[j]);
        picked[i] = pool[i];
    }
    return picked;
}

// FNV-1a; stable 64-bit hash for deriving per-cell RNG streams from names.
inline std::uint64_t fnv1a64(const char* data, std::size_t len) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace lossprobe
