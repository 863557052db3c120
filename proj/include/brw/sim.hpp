#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "brw/kernel.hpp"
#include "brw/rng.hpp"

namespace brw {

enum class SimMode { simple, multiplicity, division_rate, affinity_division };

struct SimConfig {
    KernelSpec kernel = KernelSpec::single_flip(1);
    int c = 2;                          // offspring per division
    SimMode mode = SimMode::simple;
    double p = 0.0;                     // division rate (division_rate mode)
    std::vector<double> division_table; // affinity -> division rate (affinity mode)
    std::optional<std::uint64_t> target;
    std::vector<std::uint64_t> start = {0};
    int steps = 0;
    std::uint64_t seed = 0;
    std::optional<int> snapshot_every;
    int dense_threshold_bits = 26;      // dense storage for state spaces <= 2^this
};

// Throws usage_error / guard_error on invalid configs; returns warnings
// (c = 1 random-walk degeneration, non-monotone division table).
std::vector<std::string> validate(const SimConfig& config);

// Set of active vertices; dense bitset for small state spaces, ordered set
// beyond. Iteration is in ascending vertex order either way.
class ActiveSet {
public:
    ActiveSet(std::uint64_t state_count, bool dense);

    std::uint64_t state_count() const { return state_count_; }
    bool dense() const { return dense_; }
    std::uint64_t size() const { return size_; }
    bool contains(std::uint64_t v) const;
    void insert(std::uint64_t v);

    template <typename F>
    void for_each(F&& fn) const {
        if (dense_) {
            for (std::size_t block = 0; block < bits_.size(); ++block) {
                std::uint64_t w = bits_[block];
                while (w) {
                    fn(std::uint64_t(block) * 64 + std::countr_zero(w));
                    w &= w - 1;
                }
            }
        } else {
            for (const auto v : sparse_) fn(v);
        }
    }

    std::vector<std::uint64_t> to_vector() const;

private:
    std::uint64_t state_count_ = 0;
    bool dense_ = true;
    std::uint64_t size_ = 0;
    std::vector<std::uint64_t> bits_;
    std::set<std::uint64_t> sparse_;
};

// Vertex -> particle count. Totals beyond 2^63 are a hard error.
class Population {
public:
    Population(std::uint64_t state_count, bool dense);

    std::uint64_t state_count() const { return state_count_; }
    bool dense() const { return dense_; }
    std::uint64_t total() const { return total_; }
    std::uint64_t occupied() const { return occupied_count_; }
    std::uint64_t count(std::uint64_t v) const;
    void add(std::uint64_t v, std::uint64_t m);

    // Ascending vertex order.
    template <typename F>
    void for_each(F&& fn) const {
        if (dense_) {
            for (const auto v : occupied_list_) fn(v, counts_[v]);
        } else {
            for (const auto& [v, m] : sparse_) fn(v, m);
        }
    }

    void finalize();  // sorts the dense occupied list; called after a build

private:
    std::uint64_t state_count_ = 0;
    bool dense_ = true;
    std::uint64_t total_ = 0;
    std::uint64_t occupied_count_ = 0;
    std::vector<std::uint64_t> counts_;
    std::vector<std::uint64_t> occupied_list_;
    std::map<std::uint64_t, std::uint64_t> sparse_;
};

ActiveSet step_simple(const ActiveSet& active, const KernelSpec& kernel, int c, Xoshiro256& rng);
Population step_multiplicity(const Population& pop, const KernelSpec& kernel, int c, Xoshiro256& rng);
Population step_division_rate(const Population& pop, const KernelSpec& kernel, double p, Xoshiro256& rng);
Population step_affinity_division(const Population& pop, const KernelSpec& kernel,
                                  std::span<const double> division_table, std::uint64_t target,
                                  Xoshiro256& rng);

struct StepRecord {
    std::uint64_t active_count = 0;  // occupied vertices
    std::uint64_t population = 0;    // particles (equals active_count in simple mode)
    std::vector<std::uint64_t> affinity_hist;
    std::optional<std::vector<std::uint64_t>> snapshot;  // sorted occupied vertices
    std::vector<std::uint64_t> snapshot_counts;          // per vertex, multiplicity modes
};

struct Trajectory {
    int n_bits = 0;  // 0 for non-hypercube kernels
    std::uint64_t state_count = 0;
    bool multiplicity_semantics = false;
    std::vector<StepRecord> records;  // records[t] is the state after t steps
};

// Deterministic given (config, replica): the stream is derived from
// (config.seed, replica).
Trajectory run_replica(const SimConfig& config, std::uint64_t replica);
inline Trajectory run_simulation(const SimConfig& config) { return run_replica(config, 0); }

// One deterministic expectation step: constant rate  E <- c M^T E,
// division rate  E <- (1-p) E + 2 p M^T E.
std::vector<double> expectation_step(const std::vector<double>& dist, const KernelSpec& kernel,
                                     SimMode mode, int c, double p);

// Propagates `steps` expectation steps; with normalize=true each step is
// divided by the growth factor (c or 1+p) so the result stays a probability
// vector. State space guarded at 2^20.
std::vector<double> propagate_expectation(std::vector<double> dist, const KernelSpec& kernel,
                                          SimMode mode, int c, double p, int steps,
                                          bool normalize = true);

// First step t with active_count >= fraction * state_count.
std::optional<int> partial_cover_time(const Trajectory& traj, double fraction);

// First step t with every vertex active.
std::optional<int> detect_full_cover(const Trajectory& traj);

}  // namespace brw
