#pragma once

#include <cstdint>

// Deterministic, platform-independent random number machinery.
// std::uniform_real_distribution et al. are implementation-defined, so all
// draws below are hand-rolled from raw 64-bit words.

namespace hitstats {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Order-sensitive mix of structured indices into a child seed.
// Used by the harness: hash(master_seed, system id, z index, r index, trial).
inline uint64_t seed_chain(uint64_t seed, std::initializer_list<uint64_t> tags) {
    for (uint64_t t : tags) {
        seed ^= t + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2);
        uint64_t s = seed;
        seed = splitmix64(s);
    }
    return seed;
}

class Xoshiro256 {
public:
    explicit Xoshiro256(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

// MSB-first bit stream over Xoshiro words. Feeds the dyadic orbit generators.
class BitStream {
public:
    explicit BitStream(uint64_t seed) : rng_(seed) {}

    uint32_t next_bit() {
        if (bits_left_ == 0) {
            word_ = rng_.next();
            bits_left_ = 64;
        }
        --bits_left_;
        return static_cast<uint32_t>((word_ >> bits_left_) & 1u);
    }

private:
    Xoshiro256 rng_;
    uint64_t word_ = 0;
    int bits_left_ = 0;
};

}  // namespace hitstats
