#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brw/sim.hpp"

namespace brw {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail probability of a chi-square variate.
double chi_square_pvalue(double statistic, int dof);

struct GofResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    std::size_t cells = 0;  // after pooling
};

// Pearson goodness of fit. Cells with expected count < 5 are pooled into the
// next cell (the tail pools backwards), the standard validity condition.
GofResult chi_square_gof(std::span<const std::uint64_t> observed,
                         std::span<const double> expected_probs);

// Half the L1 distance between two probability vectors.
double tv_distance(std::span<const double> a, std::span<const double> b);

struct Aggregate {
    std::string config_digest;
    int replicas = 0;
    struct PerStep {
        double s_mean = 0.0, s_se = 0.0;
        double z_mean = 0.0, z_se = 0.0;
    };
    std::vector<PerStep> per_step;                          // index = step
    std::vector<std::vector<std::uint64_t>> pooled_affinity;  // per step, empty without target
};

// Order-independent aggregation of completed replica trajectories.
Aggregate aggregate(std::span<const Trajectory> runs, std::string config_digest);

// Runs `replicas` independent replicas (streams derived from (seed, replica))
// and aggregates. Deterministic regardless of worker scheduling. threads = 0
// picks the hardware concurrency.
Aggregate monte_carlo(const SimConfig& config, int replicas, std::uint64_t seed, int threads = 0);

// Same, but also hands back every trajectory (replica index order).
std::vector<Trajectory> run_replicas(const SimConfig& config, int replicas, std::uint64_t seed,
                                     int threads = 0);

}  // namespace brw
