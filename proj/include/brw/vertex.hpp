#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace brw {

constexpr int kMaxBits = 62;

// One vertex of the n_bits-dimensional hypercube: the low n_bits of `bits`.
struct VertexLabel {
    std::uint64_t bits = 0;
    int n_bits = 0;

    VertexLabel() = default;
    VertexLabel(std::uint64_t b, int n) : bits(b), n_bits(n) {
        if (n < 1 || n > kMaxBits)
            throw std::invalid_argument("VertexLabel: dimension out of [1, 62]: " + std::to_string(n));
        if (n < 64 && (b >> n) != 0)
            throw std::invalid_argument("VertexLabel: bits exceed dimension");
    }

    friend bool operator==(VertexLabel a, VertexLabel b) = default;
};

inline int hamming(VertexLabel a, VertexLabel b) {
    if (a.n_bits != b.n_bits)
        throw std::invalid_argument("hamming: dimension mismatch");
    return std::popcount(a.bits ^ b.bits);
}

inline int hamming_bits(std::uint64_t a, std::uint64_t b) {
    return std::popcount(a ^ b);
}

// n_bits minus the Hamming distance to the target vertex.
inline int affinity(VertexLabel v, VertexLabel target) {
    return v.n_bits - hamming(v, target);
}

inline int affinity_bits(std::uint64_t v, std::uint64_t target, int n_bits) {
    return n_bits - hamming_bits(v, target);
}

}  // namespace brw
