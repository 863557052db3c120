#include <cmath>
#include <map>
#include <set>

#include "doctest.h"

#include "brw/errors.hpp"
#include "brw/rng.hpp"
#include "brw/sim.hpp"
#include "brw/stats.hpp"
#include "brw/verify.hpp"

using namespace brw;

namespace {

SimConfig base_config(KernelSpec kernel, SimMode mode, int steps, std::uint64_t seed) {
    SimConfig c;
    c.kernel = std::move(kernel);
    c.mode = mode;
    c.c = 2;
    c.steps = steps;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("config validation") {
    SimConfig c = base_config(KernelSpec::single_flip(5), SimMode::simple, 3, 1);
    CHECK(validate(c).empty());
    c.c = 1;
    CHECK(validate(c).size() == 1);  // random-walk degeneration warning
    c.c = 0;
    CHECK_THROWS_AS(validate(c), usage_error);
    c.c = 2;
    c.start = {40};
    CHECK_THROWS_AS(validate(c), usage_error);  // out of range
    c.start = {};
    CHECK_THROWS_AS(validate(c), usage_error);
    c.start = {0};
    c.mode = SimMode::multiplicity;
    c.steps = 200;
    CHECK_THROWS_AS(validate(c), guard_error);  // overflow horizon
    c.steps = 10;
    c.mode = SimMode::division_rate;
    c.p = 1.0;
    CHECK_THROWS_AS(validate(c), usage_error);
    c.p = 0.5;
    CHECK(validate(c).empty());
    c.mode = SimMode::affinity_division;
    c.target = 0;
    CHECK_THROWS_AS(validate(c), usage_error);  // missing table
    c.division_table.assign(6, 0.5);
    CHECK(validate(c).empty());
    c.division_table[2] = 0.1;  // non-monotone
    CHECK(validate(c).size() == 1);
    c.division_table[2] = 1.5;
    CHECK_THROWS_AS(validate(c), usage_error);
}

TEST_CASE("single simple step lands on neighbors") {
    const KernelSpec kernel = KernelSpec::single_flip(8);
    Xoshiro256 rng(5);
    ActiveSet start(kernel.state_count(), true);
    start.insert(0b10110001);
    for (int trial = 0; trial < 200; ++trial) {
        const ActiveSet next = step_simple(start, kernel, 2, rng);
        CHECK(next.size() >= 1);
        CHECK(next.size() <= 2);
        next.for_each([&](std::uint64_t v) { CHECK(hamming_bits(v, 0b10110001) == 1); });
    }
}

TEST_CASE("population counts are conserved in multiplicity mode") {
    SimConfig c = base_config(KernelSpec::mixture(6, 3), SimMode::multiplicity, 12, 77);
    const Trajectory traj = run_simulation(c);
    std::uint64_t expect = 1;
    for (std::size_t t = 0; t < traj.records.size(); ++t) {
        CHECK(traj.records[t].population == expect);
        CHECK(traj.records[t].active_count <= expect);
        if (expect <= (std::uint64_t(1) << 62)) expect *= 2;
    }
}

TEST_CASE("a lone particle on the complete graph always vacates its node") {
    const KernelSpec kernel = KernelSpec::complete(6);
    Xoshiro256 rng(6);
    for (int trial = 0; trial < 300; ++trial) {
        Population pop(6, true);
        pop.add(3, 1);
        pop.finalize();
        const Population next = step_multiplicity(pop, kernel, 2, rng);
        CHECK(next.count(3) == 0);
        CHECK(next.total() == 2);
    }
}

TEST_CASE("division rate bounds and guards") {
    const KernelSpec kernel = KernelSpec::single_flip(6);
    Xoshiro256 rng(7);
    Population pop(64, true);
    pop.add(0, 1000);
    pop.finalize();
    const Population next = step_division_rate(pop, kernel, 0.6, rng);
    CHECK(next.total() >= 1000);
    CHECK(next.total() <= 2000);
    CHECK_THROWS_AS(step_division_rate(pop, kernel, 1.0, rng), usage_error);
    CHECK_THROWS_AS(step_division_rate(pop, kernel, 0.0, rng), usage_error);
}

TEST_CASE("population overflow is a hard error") {
    Population pop(4, true);
    pop.add(0, (std::uint64_t(1) << 63) - 1);
    CHECK_THROWS_AS(pop.add(1, 2), guard_error);
}

TEST_CASE("affinity division boundary tables") {
    const KernelSpec kernel = KernelSpec::single_flip(5);
    Xoshiro256 rng(8);
    Population pop(32, true);
    pop.add(9, 7);
    pop.finalize();
    // all-zero table freezes the population
    const std::vector<double> zeros(6, 0.0);
    const Population frozen = step_affinity_division(pop, kernel, zeros, 0, rng);
    CHECK(frozen.total() == 7);
    CHECK(frozen.count(9) == 7);
    // all-one table doubles it, like plain multiplicity with c = 2
    const std::vector<double> ones(6, 1.0);
    const Population doubled = step_affinity_division(pop, kernel, ones, 0, rng);
    CHECK(doubled.total() == 14);
    CHECK(doubled.count(9) == 0);  // every child moved
    const std::vector<double> short_table(5, 1.0);
    CHECK_THROWS_AS(step_affinity_division(pop, kernel, short_table, 0, rng), usage_error);
}

TEST_CASE("parity law and growth bounds on the cube") {
    for (const auto& r : verify_suite("parity")) CHECK(r.pass);

    SimConfig c = base_config(KernelSpec::single_flip(7), SimMode::simple, 14, 21);
    c.snapshot_every = 1;
    for (std::uint64_t replica = 0; replica < 10; ++replica) {
        const Trajectory traj = run_replica(c, replica);
        for (std::size_t t = 1; t < traj.records.size(); ++t) {
            const auto& prev = *traj.records[t - 1].snapshot;
            const auto& cur = *traj.records[t].snapshot;
            CHECK(cur.size() >= 1);
            CHECK(cur.size() <= 2 * prev.size());
            // each new active vertex must neighbor some previously active one
            for (const auto w : cur) {
                bool reachable = false;
                for (const auto v : prev)
                    if (hamming_bits(v, w) == 1) {
                        reachable = true;
                        break;
                    }
                CHECK(reachable);
            }
        }
    }
}

TEST_CASE("grouped placement matches per-particle stepping") {
    // Outcome distribution of three multiplicity steps on the 3-cube, grouped
    // multinomial placement vs a naive per-particle oracle.
    const KernelSpec kernel = KernelSpec::single_flip(3);
    constexpr int kRuns = 100000;

    auto fingerprint = [](const Population& pop) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        pop.for_each([&](std::uint64_t v, std::uint64_t m) {
            h ^= v * 0x9e3779b97f4a7c15ull + m;
            h *= 0x100000001b3ull;
        });
        return h;
    };

    std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> hist;
    Xoshiro256 rng_a(1234);
    for (int run = 0; run < kRuns; ++run) {
        Population pop(8, true);
        pop.add(0, 1);
        pop.finalize();
        for (int t = 0; t < 3; ++t) pop = step_multiplicity(pop, kernel, 2, rng_a);
        ++hist[fingerprint(pop)].first;
    }
    Xoshiro256 rng_b(4321);
    for (int run = 0; run < kRuns; ++run) {
        std::map<std::uint64_t, std::uint64_t> pop{{0, 1}};
        for (int t = 0; t < 3; ++t) {
            std::map<std::uint64_t, std::uint64_t> next;
            for (const auto& [v, m] : pop)
                for (std::uint64_t particle = 0; particle < 2 * m; ++particle)
                    ++next[sample_neighbor(kernel, v, rng_b)];
            pop = std::move(next);
        }
        Population as_pop(8, true);
        for (const auto& [v, m] : pop) as_pop.add(v, m);
        as_pop.finalize();
        ++hist[fingerprint(as_pop)].second;
    }

    // two-sample chi-square over outcome fingerprints, rare cells pooled
    double chi2 = 0.0;
    int cells = 0;
    std::uint64_t pool_a = 0, pool_b = 0;
    auto add_cell = [&](double a, double b) {
        const double total = a + b;
        const double diff = a - b;
        chi2 += diff * diff / total;  // equal sample sizes
        ++cells;
    };
    for (const auto& [fp, counts] : hist) {
        if (counts.first + counts.second < 10) {
            pool_a += counts.first;
            pool_b += counts.second;
        } else {
            add_cell(double(counts.first), double(counts.second));
        }
    }
    if (pool_a + pool_b > 0) add_cell(double(pool_a), double(pool_b));
    const double p = chi_square_pvalue(chi2, cells - 1);
    INFO("two-sample chi2 ", chi2, " cells ", cells);
    CHECK(p > 0.01);
}

TEST_CASE("grouped placement follows the kernel rows") {
    // Children placed through the grouped multinomial paths (counts above the
    // per-child threshold) pooled over many steps are still multinomial on
    // the kernel row, so a goodness-of-fit against the dense row checks the
    // grouped code exactly like per-draw sampling.
    DenseMatrix lopsided(5);
    const double rows[5][5] = {{0.0, 0.5, 0.25, 0.125, 0.125},
                               {0.3, 0.0, 0.7, 0.0, 0.0},
                               {0.2, 0.2, 0.2, 0.2, 0.2},
                               {0.0, 0.9, 0.0, 0.1, 0.0},
                               {0.05, 0.05, 0.05, 0.05, 0.8}};
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) lopsided.at(i, j) = rows[i][j];

    std::uint64_t seed = 3000;
    for (const auto& kernel :
         {KernelSpec::mixture(4, 2), KernelSpec::power(4, 3), KernelSpec::complete(10),
          KernelSpec::lazy(0.4, KernelSpec::mixture(4, 2)),
          KernelSpec::explicit_matrix(lopsided)}) {
        const std::uint64_t v = 1;
        const DenseMatrix m = dense_matrix(kernel);
        std::vector<std::uint64_t> pooled(m.n, 0);
        Xoshiro256 rng(++seed);
        for (int step = 0; step < 100; ++step) {
            Population pop(kernel.state_count(), true);
            pop.add(v, 500);  // 1000 children, well above the grouping cutoff
            pop.finalize();
            const Population next = step_multiplicity(pop, kernel, 2, rng);
            CHECK(next.total() == 1000);
            next.for_each([&](std::uint64_t w, std::uint64_t count) { pooled[w] += count; });
        }
        std::vector<double> expected(m.n);
        for (std::size_t j = 0; j < m.n; ++j) {
            expected[j] = m.at(v, j);
            if (expected[j] == 0.0) CHECK(pooled[j] == 0);
        }
        const GofResult gof = chi_square_gof(pooled, expected);
        INFO("kernel states ", m.n, " p ", gof.p_value);
        CHECK(gof.p_value > 0.01);
    }
}

TEST_CASE("grouped placement carries trillion-particle populations") {
    // 40 doubling steps give 2^40 particles on at most 2^8 vertices; the
    // grouped draws keep the step cost independent of the population size and
    // the total must stay exact.
    SimConfig c = base_config(KernelSpec::mixture(8, 2), SimMode::multiplicity, 40, 2025);
    const Trajectory traj = run_simulation(c);
    CHECK(traj.records[40].population == (std::uint64_t(1) << 40));
    CHECK(traj.records[40].active_count == 256);  // support saturates at this size
}

TEST_CASE("dense and sparse storage produce identical trajectories") {
    SimConfig dense = base_config(KernelSpec::mixture(8, 2), SimMode::multiplicity, 8, 99);
    dense.snapshot_every = 2;
    SimConfig sparse = dense;
    sparse.dense_threshold_bits = 2;  // force the sparse path
    for (std::uint64_t replica = 0; replica < 4; ++replica) {
        const Trajectory a = run_replica(dense, replica);
        const Trajectory b = run_replica(sparse, replica);
        REQUIRE(a.records.size() == b.records.size());
        for (std::size_t t = 0; t < a.records.size(); ++t) {
            CHECK(a.records[t].active_count == b.records[t].active_count);
            CHECK(a.records[t].population == b.records[t].population);
            CHECK(a.records[t].snapshot == b.records[t].snapshot);
        }
    }
    // sparse mode carries large dimensions
    SimConfig wide = base_config(KernelSpec::single_flip(40), SimMode::simple, 12, 5);
    const Trajectory traj = run_simulation(wide);
    CHECK(traj.records.back().active_count > 1);
}

TEST_CASE("expectation propagation") {
    const KernelSpec lazy = KernelSpec::lazy(0.5, KernelSpec::single_flip(5));
    const KernelSpec flip = KernelSpec::single_flip(5);
    std::vector<double> dist(32, 0.0);
    dist[7] = 1.0;
    // the half-lazy kernel is exactly the loop-added update (P + I) / 2
    const auto lazy_step = propagate_expectation(dist, lazy, SimMode::multiplicity, 2, 0.0, 1);
    const auto flip_step = propagate_expectation(dist, flip, SimMode::multiplicity, 2, 0.0, 1);
    for (std::size_t v = 0; v < 32; ++v)
        CHECK(lazy_step[v] == doctest::Approx(0.5 * dist[v] + 0.5 * flip_step[v]).epsilon(1e-14));

    // mass is preserved by normalized propagation
    for (const auto mode : {SimMode::multiplicity, SimMode::division_rate}) {
        const auto out = propagate_expectation(dist, flip, mode, 2, 0.6, 60);
        double sum = 0.0;
        for (const double w : out) sum += w;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }

    // constant rate on a bipartite kernel oscillates between parity classes
    auto cur = dist;
    for (int t = 1; t <= 9; ++t) {
        cur = propagate_expectation(cur, flip, SimMode::multiplicity, 2, 0.0, 1);
        for (std::size_t v = 0; v < 32; ++v)
            if ((std::popcount(v) + std::popcount(7ull) + t) % 2 == 1) CHECK(cur[v] == 0.0);
    }

    // the division-rate update mixes the same kernel to uniform
    std::vector<double> start(128, 0.0);
    start[0] = 1.0;
    const auto mixed =
        propagate_expectation(start, KernelSpec::single_flip(7), SimMode::division_rate, 2, 0.6, 100);
    const std::vector<double> uniform(128, 1.0 / 128.0);
    CHECK(tv_distance(mixed, uniform) < 1e-3);

    CHECK_THROWS_AS(propagate_expectation(start, KernelSpec::single_flip(7), SimMode::division_rate,
                                          2, 0.0, 3),
                    usage_error);
    std::vector<double> negative(128, 0.0);
    negative[0] = -1.0;
    CHECK_THROWS_AS(
        propagate_expectation(negative, KernelSpec::single_flip(7), SimMode::multiplicity, 2, 0.0, 1),
        usage_error);
    CHECK_THROWS_AS(propagate_expectation(std::vector<double>(4, 0.25),
                                          KernelSpec::single_flip(21), SimMode::multiplicity, 2,
                                          0.0, 1),
                    guard_error);
}

TEST_CASE("cover detection") {
    SimConfig c = base_config(KernelSpec::mixture(4, 2), SimMode::simple, 60, 31);
    int full = 0;
    for (std::uint64_t replica = 0; replica < 20; ++replica) {
        const Trajectory traj = run_replica(c, replica);
        if (detect_full_cover(traj)) ++full;
        const auto half = partial_cover_time(traj, 0.5);
        REQUIRE(half);
        CHECK(*half > 0);
    }
    CHECK(full >= 15);  // non-bipartite kernels reach simultaneous full cover

    // bipartite single-start runs never cover everything at once
    SimConfig flip = base_config(KernelSpec::single_flip(4), SimMode::simple, 200, 17);
    for (std::uint64_t replica = 0; replica < 10; ++replica)
        CHECK_FALSE(detect_full_cover(run_replica(flip, replica)));

    // a split start across both halves can cover the complete bipartite graph
    SimConfig split = base_config(KernelSpec::complete_bipartite(4), SimMode::simple, 40, 23);
    split.start = {0, 4};
    int covered = 0;
    for (std::uint64_t replica = 0; replica < 20; ++replica)
        if (detect_full_cover(run_replica(split, replica))) ++covered;
    CHECK(covered >= 10);

    const Trajectory traj = run_simulation(base_config(KernelSpec::single_flip(4), SimMode::simple, 3, 2));
    CHECK_FALSE(partial_cover_time(traj, 1.0));
    CHECK_THROWS_AS(partial_cover_time(traj, 0.0), usage_error);
    CHECK_THROWS_AS(partial_cover_time(traj, 1.1), usage_error);
}

TEST_CASE("early growth is exponential on average") {
    SimConfig c = base_config(KernelSpec::single_flip(10), SimMode::simple, 10, 1212);
    std::vector<double> ratios;
    for (std::uint64_t replica = 0; replica < 100; ++replica) {
        const Trajectory traj = run_replica(c, replica);
        for (std::size_t t = 0; t + 1 < traj.records.size(); ++t) {
            const double s = double(traj.records[t].active_count);
            if (s <= 128.0)
                ratios.push_back(double(traj.records[t + 1].active_count) / s);
        }
    }
    double mean = 0.0;
    for (const double r : ratios) mean += r;
    mean /= double(ratios.size());
    double var = 0.0;
    for (const double r : ratios) var += (r - mean) * (r - mean);
    var /= double(ratios.size() - 1);
    const double se = std::sqrt(var / double(ratios.size()));
    INFO("mean growth ratio ", mean, " se ", se);
    CHECK(mean > 1.0 + 3.0 * se);
}

TEST_CASE("step-function division confines the affinity support") {
    // Divide only at affinity >= 4 on the 7-cube. Active particles mutate
    // every step, so their distance parity tracks t; below the threshold they
    // freeze at affinity 3. After 15 steps the support is {3, 4, 6} from
    // initial affinity 7 and {3, 5, 7} from initial affinity 6.
    SimConfig c;
    c.kernel = KernelSpec::single_flip(7);
    c.mode = SimMode::affinity_division;
    c.steps = 15;
    c.seed = 4711;
    c.target = 0;
    c.division_table = {0, 0, 0, 0, 1, 1, 1, 1};
    for (const auto& [start, allowed] :
         std::vector<std::pair<std::uint64_t, std::set<std::size_t>>>{
             {0b0000000, {3, 4, 6}}, {0b0000001, {3, 5, 7}}}) {
        c.start = {start};
        const Aggregate agg = monte_carlo(c, 20, c.seed);
        const auto& hist = agg.pooled_affinity[15];
        for (std::size_t a = 0; a < hist.size(); ++a)
            if (!allowed.count(a)) CHECK(hist[a] == 0);
        std::uint64_t inside = 0;
        for (const auto a : allowed) inside += hist[a];
        CHECK(inside > 0);
    }
}

TEST_CASE("affinity histograms account for every particle") {
    SimConfig c = base_config(KernelSpec::single_flip(6), SimMode::division_rate, 10, 3);
    c.p = 0.6;
    c.target = 0b111000;
    const Trajectory traj = run_simulation(c);
    for (const auto& rec : traj.records) {
        std::uint64_t total = 0;
        for (const auto count : rec.affinity_hist) total += count;
        CHECK(total == rec.population);
    }
}
