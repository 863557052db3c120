#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"

#include "brw/errors.hpp"
#include "brw/kernel.hpp"
#include "brw/rng.hpp"
#include "brw/serialize.hpp"
#include "brw/stats.hpp"
#include "brw/verify.hpp"

using namespace brw;

TEST_CASE("hamming distance") {
    CHECK(hamming({0b000, 3}, {0b101, 3}) == 2);
    CHECK(hamming({0b0110, 4}, {0b0110, 4}) == 0);
    CHECK(hamming({0, 7}, {0b1111111, 7}) == 7);
    CHECK_THROWS_AS(hamming({0, 3}, {0, 4}), std::invalid_argument);
    CHECK_THROWS_AS(VertexLabel(0b1000, 3), std::invalid_argument);
}

TEST_CASE("affinity") {
    const VertexLabel target{0b1011001, 7};
    CHECK(affinity(target, target) == 7);
    CHECK(affinity({0b0000000, 7}, {0b1000000, 7}) == 6);
    // exhaustive: the number of vertices at affinity a is C(7, 7-a)
    std::vector<int> counts(8, 0);
    for (std::uint64_t v = 0; v < 128; ++v) ++counts[std::size_t(affinity({v, 7}, target))];
    for (int a = 0; a <= 7; ++a) CHECK(std::uint64_t(counts[std::size_t(a)]) == binomial_coefficient(7, 7 - a));
}

TEST_CASE("kernel construction guards") {
    CHECK_THROWS_AS(KernelSpec::mixture(5, 0), usage_error);
    CHECK_THROWS_AS(KernelSpec::mixture(5, 6), usage_error);
    CHECK_THROWS_AS(KernelSpec::power(5, 0), usage_error);
    CHECK_THROWS_AS(KernelSpec::lazy(0.0, KernelSpec::single_flip(3)), usage_error);
    CHECK_THROWS_AS(KernelSpec::lazy(1.0, KernelSpec::single_flip(3)), usage_error);
    CHECK_THROWS_AS(KernelSpec::single_flip(63), usage_error);
    CHECK_THROWS_AS(KernelSpec::complete(1), usage_error);

    DenseMatrix bad(2);
    bad.at(0, 0) = 0.5;  // row sums to 0.5
    bad.at(1, 1) = 1.0;
    CHECK_THROWS_AS(KernelSpec::explicit_matrix(bad), usage_error);

    DenseMatrix disconnected(4);
    disconnected.at(0, 1) = 1.0;
    disconnected.at(1, 0) = 1.0;
    disconnected.at(2, 3) = 1.0;
    disconnected.at(3, 2) = 1.0;
    CHECK_THROWS_AS(KernelSpec::explicit_matrix(disconnected), guard_error);
}

TEST_CASE("single flip sampling stays at distance 1") {
    const KernelSpec kernel = KernelSpec::single_flip(9);
    Xoshiro256 rng(42);
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t v = rng() & 0x1ff;
        CHECK(hamming_bits(v, sample_neighbor(kernel, v, rng)) == 1);
    }
}

TEST_CASE("power sampling parity") {
    Xoshiro256 rng(43);
    for (const int k : {1, 2, 3, 4}) {
        const KernelSpec kernel = KernelSpec::power(6, k);
        for (int i = 0; i < 500; ++i) {
            const std::uint64_t v = rng() & 0x3f;
            const std::uint64_t w = sample_neighbor(kernel, v, rng);
            CHECK(hamming_bits(v, w) % 2 == k % 2);
        }
    }
}

TEST_CASE("complete graph sampling never stays") {
    const KernelSpec kernel = KernelSpec::complete(9);
    Xoshiro256 rng(44);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 3000; ++i) {
        const std::uint64_t w = sample_neighbor(kernel, 4, rng);
        CHECK(w != 4);
        seen.insert(w);
    }
    CHECK(seen.size() == 8);
}

namespace {

void check_sampling_fidelity(const KernelSpec& kernel, std::uint64_t v, std::uint64_t draws,
                             std::uint64_t seed) {
    const DenseMatrix m = dense_matrix(kernel);
    std::vector<std::uint64_t> observed(m.n, 0);
    Xoshiro256 rng(seed);
    for (std::uint64_t i = 0; i < draws; ++i) ++observed[std::size_t(sample_neighbor(kernel, v, rng))];
    std::vector<double> expected(m.n);
    for (std::size_t j = 0; j < m.n; ++j) {
        expected[j] = m.at(v, j);
        if (expected[j] == 0.0) CHECK(observed[j] == 0);  // support must match exactly
    }
    const GofResult gof = chi_square_gof(observed, expected);
    INFO("kernel state count ", m.n, " p ", gof.p_value);
    CHECK(gof.p_value > 0.01);
}

}  // namespace

TEST_CASE("sampling matches dense rows (chi-square)") {
    check_sampling_fidelity(KernelSpec::single_flip(5), 11, 1000000, 1001);
    check_sampling_fidelity(KernelSpec::power(5, 2), 11, 1000000, 1002);
    check_sampling_fidelity(KernelSpec::power(5, 3), 7, 1000000, 1003);
    check_sampling_fidelity(KernelSpec::mixture(5, 3), 11, 1000000, 1004);
    check_sampling_fidelity(KernelSpec::lazy(0.5, KernelSpec::single_flip(5)), 3, 1000000, 1005);
    check_sampling_fidelity(KernelSpec::mixture(8, 5), 100, 1000000, 1006);
    check_sampling_fidelity(KernelSpec::complete(10), 4, 1000000, 1007);
    check_sampling_fidelity(KernelSpec::complete_bipartite(8), 12, 1000000, 1008);

    // lopsided explicit matrix
    DenseMatrix m(5);
    const double rows[5][5] = {{0.0, 0.5, 0.25, 0.125, 0.125},
                               {0.3, 0.0, 0.7, 0.0, 0.0},
                               {0.2, 0.2, 0.2, 0.2, 0.2},
                               {0.0, 0.9, 0.0, 0.1, 0.0},
                               {0.05, 0.05, 0.05, 0.05, 0.8}};
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) m.at(i, j) = rows[i][j];
    const KernelSpec expl = KernelSpec::explicit_matrix(m);
    check_sampling_fidelity(expl, 0, 1000000, 1009);
    check_sampling_fidelity(expl, 3, 1000000, 1010);
}

TEST_CASE("dense matrix basics") {
    const DenseMatrix m1 = dense_matrix(KernelSpec::single_flip(1));
    CHECK(m1.at(0, 0) == 0.0);
    CHECK(m1.at(0, 1) == 1.0);
    CHECK(m1.at(1, 0) == 1.0);
    CHECK(m1.at(1, 1) == 0.0);

    for (const auto& kernel :
         {KernelSpec::single_flip(6), KernelSpec::power(6, 3), KernelSpec::mixture(6, 4),
          KernelSpec::lazy(0.25, KernelSpec::mixture(6, 2)), KernelSpec::complete(17),
          KernelSpec::complete_bipartite(9)}) {
        const DenseMatrix m = dense_matrix(kernel);
        for (std::size_t i = 0; i < m.n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < m.n; ++j) {
                row += m.at(i, j);
                CHECK(m.at(i, j) >= 0.0);
            }
            CHECK(std::abs(row - 1.0) <= 1e-12);
        }
    }

    // symmetry of the hypercube family
    for (const auto& kernel :
         {KernelSpec::single_flip(6), KernelSpec::power(6, 4), KernelSpec::mixture(6, 5)}) {
        const DenseMatrix m = dense_matrix(kernel);
        for (std::size_t i = 0; i < m.n; ++i)
            for (std::size_t j = 0; j < i; ++j) CHECK(m.at(i, j) == m.at(j, i));
    }

    // full-depth mixture touches every pair
    const DenseMatrix full = dense_matrix(KernelSpec::mixture(6, 6));
    CHECK(*std::min_element(full.a.begin(), full.a.end()) > 0.0);

    // half-lazy single flip is the loop-added kernel (P + I) / 2
    const DenseMatrix lazy = dense_matrix(KernelSpec::lazy(0.5, KernelSpec::single_flip(5)));
    const DenseMatrix base = dense_matrix(KernelSpec::single_flip(5));
    for (std::size_t i = 0; i < lazy.n; ++i)
        for (std::size_t j = 0; j < lazy.n; ++j)
            CHECK(lazy.at(i, j) == (i == j ? 0.5 : 0.5 * base.at(i, j)));

    CHECK_THROWS_AS(dense_matrix(KernelSpec::single_flip(13)), guard_error);
}

TEST_CASE("degree closed forms") {
    CHECK(degree(KernelSpec::mixture(7, 2)) == 29);
    CHECK(degree(KernelSpec::mixture(7, 7)) == 128);
    CHECK(degree(KernelSpec::single_flip(9)) == 9);
    CHECK(degree(KernelSpec::complete(100)) == 99);
    CHECK(degree(KernelSpec::complete_bipartite(37)) == 37);
    CHECK(degree(KernelSpec::lazy(0.5, KernelSpec::single_flip(9))) == 10);
    CHECK(degree(KernelSpec::lazy(0.5, KernelSpec::mixture(9, 3))) ==
          degree(KernelSpec::mixture(9, 3)));  // mixture already has loops
    // closed form (N^2 + N + 2) / 2 for depth 2
    for (int n = 2; n <= 20; ++n)
        CHECK(degree(KernelSpec::mixture(n, 2)) == std::uint64_t(n * n + n + 2) / 2);
}

TEST_CASE("degree and min-entry oracles") {
    for (const auto& r : verify_suite("degree")) CHECK(r.pass);
    for (const auto& r : verify_suite("min-entry")) CHECK(r.pass);
}

TEST_CASE("min nonzero entry of kernel powers") {
    const Rational r = min_nonzero_entry_power(10, 3);
    CHECK(r.num * 1000 == 6 * r.den);  // 6/1000 in lowest terms
    CHECK(min_nonzero_entry_power(7, 0) == Rational{1, 1});
    CHECK(min_nonzero_entry_power(62, 1) == Rational{1, 62});
    CHECK_THROWS_AS(min_nonzero_entry_power(5, 6), usage_error);
    CHECK_THROWS_AS(min_nonzero_entry_power(5, -1), usage_error);
    for (int n = 1; n <= 12; ++n)
        for (int i = 0; i <= n; ++i) {
            const Rational q = min_nonzero_entry_power(n, i);
            CHECK(min_nonzero_entry_power_value(n, i) ==
                  doctest::Approx(double(q.num) / double(q.den)).epsilon(1e-12));
        }
}

TEST_CASE("bipartite structure") {
    CHECK(is_bipartite(KernelSpec::single_flip(3)));
    CHECK(is_bipartite(KernelSpec::single_flip(13)));  // beyond the dense cap
    CHECK_FALSE(is_bipartite(KernelSpec::mixture(4, 2)));
    CHECK_FALSE(is_bipartite(KernelSpec::mixture(14, 2)));
    CHECK(is_bipartite(KernelSpec::mixture(14, 1)));
    CHECK(is_bipartite(KernelSpec::complete_bipartite(8)));
    CHECK(is_bipartite(KernelSpec::power(5, 3)));
    CHECK_FALSE(is_bipartite(KernelSpec::complete(5)));
    CHECK_FALSE(is_bipartite(KernelSpec::lazy(0.5, KernelSpec::single_flip(4))));
    CHECK_THROWS_AS(is_bipartite(KernelSpec::power(4, 2)), guard_error);   // parity classes
    CHECK_THROWS_AS(is_bipartite(KernelSpec::power(20, 2)), guard_error);  // structural path
}

TEST_CASE("common neighbors on the cube") {
    const KernelSpec h3 = KernelSpec::single_flip(3);
    CHECK(max_common_neighbors(h3, 2) == 2);
    CHECK(max_common_neighbors(KernelSpec::single_flip(4), 3) <= 3);
    const std::uint64_t antipodal[] = {0b000, 0b111};
    CHECK(common_neighbor_count(h3, antipodal) == 0);
    const std::uint64_t distance_two[] = {0b000, 0b011};
    CHECK(common_neighbor_count(h3, distance_two) == 2);
    CHECK_THROWS_AS(max_common_neighbors(h3, 5), usage_error);
    CHECK_THROWS_AS(max_common_neighbors(KernelSpec::single_flip(6), 2), guard_error);
}

TEST_CASE("transition support agrees with dense matrices") {
    Xoshiro256 rng(77);
    for (const auto& kernel :
         {KernelSpec::single_flip(5), KernelSpec::power(5, 2), KernelSpec::power(5, 3),
          KernelSpec::mixture(5, 4), KernelSpec::lazy(0.3, KernelSpec::single_flip(5)),
          KernelSpec::complete(12), KernelSpec::complete_bipartite(6)}) {
        const DenseMatrix m = dense_matrix(kernel);
        for (std::uint64_t v = 0; v < m.n; ++v)
            for (std::uint64_t w = 0; w < m.n; ++w)
                CHECK(transition_support(kernel, v, w) == (m.at(v, w) > 0.0));
    }
}

TEST_CASE("kernel config round trip") {
    const KernelSpec kernels[] = {KernelSpec::single_flip(8),
                                  KernelSpec::power(6, 4),
                                  KernelSpec::mixture(10, 7),
                                  KernelSpec::lazy(0.25, KernelSpec::single_flip(5)),
                                  KernelSpec::lazy(0.75, KernelSpec::mixture(5, 3)),
                                  KernelSpec::complete(1024),
                                  KernelSpec::complete_bipartite(512)};
    for (const auto& kernel : kernels) {
        const KernelSpec back = kernel_from_json(kernel_to_json(kernel));
        CHECK(back.kind() == kernel.kind());
        CHECK(back.state_count() == kernel.state_count());
        if (kernel.on_hypercube()) CHECK(back.n_bits() == kernel.n_bits());
    }
    CHECK_THROWS_AS(kernel_from_json(nlohmann::json{{"kind", "mystery"}}), usage_error);
    CHECK_THROWS_AS(kernel_from_json(nlohmann::json{{"kind", "mixture"}, {"n_bits", 5}}),
                    usage_error);
}
