#pragma once

#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "brw/rng.hpp"
#include "brw/vertex.hpp"

namespace brw {

enum class KernelKind {
    single_flip,         // flip one uniformly chosen bit
    power,               // k successive single-bit flips
    mixture,             // uniform depth in {1..k}, then that many flips
    lazy,                // stay with probability p_stay, else move per base
    complete,            // complete graph on n vertices, no self loop
    complete_bipartite,  // two halves of `half` vertices, uniform across
    explicit_matrix,     // arbitrary row-stochastic matrix, oracle use only
};

// Square row-major matrix.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> a;

    explicit DenseMatrix(std::size_t size = 0) : n(size), a(size * size, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

// Immutable description of a mutation rule. Values are cheap to copy and safe
// to share across threads; sampling state is always caller-owned.
class KernelSpec {
public:
    static KernelSpec single_flip(int n_bits);
    static KernelSpec power(int n_bits, int k);
    static KernelSpec mixture(int n_bits, int k);
    static KernelSpec lazy(double p_stay, KernelSpec base);
    static KernelSpec complete(std::uint64_t n);
    static KernelSpec complete_bipartite(std::uint64_t half);
    // Rejects non-stochastic rows, negative entries and disconnected support.
    static KernelSpec explicit_matrix(DenseMatrix m);

    KernelKind kind() const { return kind_; }
    int n_bits() const { return n_bits_; }
    int k() const { return k_; }
    double p_stay() const { return p_stay_; }
    const KernelSpec& base() const { return *base_; }
    const DenseMatrix& matrix() const { return *matrix_; }

    std::uint64_t state_count() const;
    // True for kernels whose states are bit strings (single_flip, power,
    // mixture and lazy over those).
    bool on_hypercube() const;
    bool valid_state(std::uint64_t v) const { return v < state_count(); }

private:
    KernelSpec() = default;

    KernelKind kind_ = KernelKind::single_flip;
    int n_bits_ = 0;
    int k_ = 0;
    double p_stay_ = 0.0;
    std::uint64_t n_states_ = 0;  // complete variants
    std::shared_ptr<const KernelSpec> base_;
    std::shared_ptr<const DenseMatrix> matrix_;
    std::shared_ptr<const std::vector<double>> row_cdf_;  // explicit sampling

    friend std::uint64_t sample_neighbor(const KernelSpec&, std::uint64_t, Xoshiro256&);
};

// Draws w with probability equal to the kernel's row entry (v, w).
std::uint64_t sample_neighbor(const KernelSpec& kernel, std::uint64_t v, Xoshiro256& rng);

// Exact dense realization; guarded at 4096 states.
DenseMatrix dense_matrix(const KernelSpec& kernel);

// Number of nonzero entries of a generic row.
std::uint64_t degree(const KernelSpec& kernel);

// Row support size of the depth-k mixture kernel by the dimension recursion;
// pure arithmetic, valid for any n_bits >= 2 while the value fits 64 bits.
std::uint64_t mixture_degree(int n_bits, int k);

// Reduced fraction i! / n^i.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    friend bool operator==(const Rational&, const Rational&) = default;
};

// Smallest nonzero entry of the i-th power of the single-flip kernel,
// exactly i!/N^i. Guarded where i! or N^i would overflow 64-bit.
Rational min_nonzero_entry_power(int n_bits, int i);
// Same value as a double, defined for any 0 <= i <= n_bits.
double min_nonzero_entry_power_value(int n_bits, int i);

// Two-coloring of the support graph. Throws guard_error when the support is
// disconnected (e.g. even powers of the single-flip kernel).
bool is_bipartite(const KernelSpec& kernel);

// True when the kernel's (v, w) transition probability is nonzero.
bool transition_support(const KernelSpec& kernel, std::uint64_t v, std::uint64_t w);

// Size of the common neighborhood of a set of distinct vertices.
std::uint64_t common_neighbor_count(const KernelSpec& kernel, std::span<const std::uint64_t> vertices);

// Maximum common-neighborhood size over all s-subsets of distinct vertices.
// Exhaustive; single_flip only, n_bits <= 5, 2 <= s <= 4.
std::uint64_t max_common_neighbors(const KernelSpec& kernel, int s);

std::uint64_t binomial_coefficient(int n, int k);

}  // namespace brw
