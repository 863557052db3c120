#include "brw/verify.hpp"

#include <cmath>
#include <cstdint>

#include "brw/errors.hpp"
#include "brw/kernel.hpp"
#include "brw/sim.hpp"
#include "brw/spectral.hpp"
#include "brw/stats.hpp"

namespace brw {

namespace {

void check(std::vector<CheckResult>& out, std::string name, std::string oracle,
           std::string tolerance, bool pass, std::string detail = "") {
    out.push_back({std::move(name), std::move(oracle), std::move(tolerance), pass,
                   std::move(detail)});
}

void suite_expander(std::vector<CheckResult>& out) {
    // The claimed constant fails at (n, r) = (4, 2): the radius-1 ball
    // {0001, 0010, 0100, 1000} has 4 = 2^(4-2) vertices but only 7 < 8
    // distinct neighbors. The brute force reports the truth.
    for (int n = 1; n <= 4; ++n) {
        bool all = true;
        std::string violations;
        for (int r = 1; r <= n; ++r)
            if (!verify_expander_bruteforce(KernelSpec::single_flip(n), r)) {
                all = false;
                violations += (violations.empty() ? "violated at r=" : ",") + std::to_string(r);
            }
        check(out, "expander_n" + std::to_string(n), "exhaustive subset enumeration", "exact", all,
              violations);
    }
}

void suite_spectra(std::vector<CheckResult>& out) {
    // The parity vector chi(v) = (-1)^(v & 1) is an exact eigenvector of the
    // mixture kernels; applying the kernel recovers the second eigenvalue.
    double worst = 0.0;
    for (int n = 2; n <= 8; ++n) {
        const std::size_t states = std::size_t(1) << n;
        std::vector<double> chi(states);
        for (std::size_t v = 0; v < states; ++v) chi[v] = (v & 1) ? -1.0 : 1.0;
        for (int k = 1; k <= n; ++k) {
            const KernelSpec kernel = KernelSpec::mixture(n, k);
            const auto applied = expectation_step(chi, kernel, SimMode::multiplicity, 1, 0.0);
            const double lambda = lambda2_mixture(n, k);
            for (std::size_t v = 0; v < states; ++v)
                worst = std::max(worst, std::abs(applied[v] - lambda * chi[v]));
        }
    }
    check(out, "lambda2_mixture", "parity eigenvector application, n_bits <= 8", "1e-10",
          worst <= 1e-10, "max residual " + std::to_string(worst));
}

void suite_min_entry(std::vector<CheckResult>& out) {
    double worst = 0.0;
    bool pass = true;
    for (int n = 1; n <= 8; ++n) {
        for (int i = 0; i <= n; ++i) {
            const Rational r = min_nonzero_entry_power(n, i);
            const double expected = double(r.num) / double(r.den);
            double observed;
            if (i == 0) {
                observed = 1.0;
            } else {
                const DenseMatrix m = dense_matrix(KernelSpec::power(n, i));
                observed = 2.0;
                for (const double x : m.a)
                    if (x > 0.0 && x < observed) observed = x;
            }
            worst = std::max(worst, std::abs(observed - expected));
            pass = pass && std::abs(observed - expected) <= 1e-10;
        }
    }
    check(out, "min_entry_power", "dense matrix-power minima, n_bits <= 8", "1e-10", pass,
          "max deviation " + std::to_string(worst));
}

void suite_degree(std::vector<CheckResult>& out) {
    bool pass = true;
    std::string first_fail;
    for (int n = 2; n <= 10; ++n) {
        const std::size_t states = std::size_t(1) << n;
        // integer row of sum_{i<=k} A^i, built by sparse vector-matrix steps
        std::vector<std::uint64_t> row(states, 0), support(states, 0), next(states);
        row[0] = 1;
        for (int k = 1; k <= n; ++k) {
            std::fill(next.begin(), next.end(), 0);
            for (std::size_t v = 0; v < states; ++v) {
                if (!row[v]) continue;
                for (int b = 0; b < n; ++b) next[v ^ (std::size_t(1) << b)] += row[v];
            }
            row = next;
            for (std::size_t v = 0; v < states; ++v) support[v] += row[v];
            std::uint64_t nonzero = 0;
            for (const auto x : support)
                if (x) ++nonzero;
            if (nonzero != degree(KernelSpec::mixture(n, k))) {
                pass = false;
                if (first_fail.empty())
                    first_fail = "n=" + std::to_string(n) + " k=" + std::to_string(k);
            }
        }
    }
    check(out, "degree_recursion", "dense nonzero row counts, n_bits <= 10", "exact", pass,
          first_fail);
}

void suite_binomial(std::vector<CheckResult>& out) {
    constexpr std::uint64_t kDraws = 100000;
    // conditional occupancy on the 3-cube: with one particle on a neighbor of
    // vertex 0 and one elsewhere, the next count on 0 is Binomial(2, 1/3)
    {
        Xoshiro256 rng = replica_engine(2024, 1);
        const KernelSpec kernel = KernelSpec::single_flip(3);
        std::vector<std::uint64_t> observed(3, 0);
        for (std::uint64_t i = 0; i < kDraws; ++i) {
            Population pop(8, true);
            pop.add(1, 1);
            pop.add(6, 1);
            pop.finalize();
            const Population next = step_multiplicity(pop, kernel, 2, rng);
            ++observed[std::size_t(next.count(0))];
        }
        const double q = 1.0 / 3.0;
        const std::vector<double> expected = {(1 - q) * (1 - q), 2 * q * (1 - q), q * q};
        const GofResult gof = chi_square_gof(observed, expected);
        check(out, "binomial_hypercube_n3", "Binomial(2, 1/3) conditional law", "p > 0.01",
              gof.p_value > 0.01, "p = " + std::to_string(gof.p_value));
    }
    // complete graph on 4 vertices at step 3 with one particle previously on
    // the node: count is Binomial(2^3 - 2, 1/3)
    {
        Xoshiro256 rng = replica_engine(2024, 2);
        const KernelSpec kernel = KernelSpec::complete(4);
        std::vector<std::uint64_t> observed(7, 0);
        for (std::uint64_t i = 0; i < kDraws; ++i) {
            Population pop(4, true);
            pop.add(0, 1);
            pop.add(1, 2);
            pop.add(2, 1);
            pop.finalize();
            const Population next = step_multiplicity(pop, kernel, 2, rng);
            ++observed[std::size_t(next.count(0))];
        }
        const double q = 1.0 / 3.0;
        std::vector<double> expected(7, 0.0);
        for (int s = 0; s <= 6; ++s)
            expected[std::size_t(s)] = double(binomial_coefficient(6, s)) * std::pow(q, s) *
                                       std::pow(1.0 - q, 6 - s);
        const GofResult gof = chi_square_gof(observed, expected);
        check(out, "binomial_complete_d4", "Binomial(6, 1/3) conditional law", "p > 0.01",
              gof.p_value > 0.01, "p = " + std::to_string(gof.p_value));
    }
}

void suite_parity(std::vector<CheckResult>& out) {
    SimConfig config;
    config.kernel = KernelSpec::single_flip(8);
    config.c = 2;
    config.mode = SimMode::simple;
    config.steps = 12;
    config.seed = 99;
    config.snapshot_every = 1;
    bool pass = true;
    for (std::uint64_t replica = 0; replica < 50 && pass; ++replica) {
        const Trajectory traj = run_replica(config, replica);
        for (std::size_t t = 0; t < traj.records.size() && pass; ++t)
            for (const auto v : *traj.records[t].snapshot)
                if (std::uint64_t(std::popcount(v)) % 2 != t % 2) {
                    pass = false;
                    break;
                }
    }
    check(out, "parity_law", "per-step Hamming-weight parity, 50 replicas, n_bits = 8", "exact",
          pass);
}

}  // namespace

std::vector<CheckResult> verify_suite(const std::string& suite) {
    std::vector<CheckResult> out;
    const bool all = suite == "all" || suite.empty();
    if (all || suite == "expander") suite_expander(out);
    if (all || suite == "spectra") suite_spectra(out);
    if (all || suite == "min-entry") suite_min_entry(out);
    if (all || suite == "degree") suite_degree(out);
    if (all || suite == "binomial") suite_binomial(out);
    if (all || suite == "parity") suite_parity(out);
    if (out.empty()) throw usage_error("verify: unknown suite '" + suite + "'");
    return out;
}

}  // namespace brw
