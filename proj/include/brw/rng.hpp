#pragma once

#include <cstdint>

namespace brw {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// xoshiro256++, seeded through splitmix64. Satisfies UniformRandomBitGenerator,
// so it plugs into the <random> distributions.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed = 0) {
        std::uint64_t z = seed;
        for (auto& w : s_) {
            z = splitmix64(z);
            w = z;
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~std::uint64_t(0); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4]{};
};

// Stream for replica r of a run with the given seed. Streams are decorrelated
// by hashing (seed, r), so results do not depend on scheduling order.
inline Xoshiro256 replica_engine(std::uint64_t seed, std::uint64_t replica) {
    return Xoshiro256(splitmix64(seed ^ splitmix64(replica * 0x9e3779b97f4a7c15ull + 0x71c9d7c3b5a1e2f5ull)));
}

}  // namespace brw
