#include "brw/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "brw/errors.hpp"

namespace brw {

namespace {

// int64 range so binomial parameters never overflow
constexpr std::uint64_t kTotalCap = (std::uint64_t(1) << 63) - 1;
constexpr std::uint64_t kPerChildThreshold = 32;
constexpr std::uint64_t kExpectationStateCap = std::uint64_t(1) << 20;

std::uint64_t draw_binomial(std::uint64_t n, double p, Xoshiro256& rng) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::binomial_distribution<std::int64_t> dist(std::int64_t(n), p);
    return std::uint64_t(dist(rng));
}

// Splits n into `cells` equally likely counts via conditional binomials.
void equal_multinomial(std::uint64_t n, std::uint64_t cells, std::vector<std::uint64_t>& out,
                       Xoshiro256& rng) {
    out.assign(cells, 0);
    std::uint64_t remaining = n;
    for (std::uint64_t i = 0; i + 1 < cells && remaining > 0; ++i) {
        const std::uint64_t x = draw_binomial(remaining, 1.0 / double(cells - i), rng);
        out[i] = x;
        remaining -= x;
    }
    out[cells - 1] += remaining;
}

// Spreads `count` particles sitting on v through `depth` rounds of uniform
// single-bit flips, population-level. Equivalent to walking each particle
// independently.
void walk_uniform_flips(int n_bits, std::uint64_t v, std::uint64_t count, int depth,
                        std::map<std::uint64_t, std::uint64_t>& out, Xoshiro256& rng) {
    std::map<std::uint64_t, std::uint64_t> cur{{v, count}};
    std::vector<std::uint64_t> cells;
    for (int step = 0; step < depth; ++step) {
        std::map<std::uint64_t, std::uint64_t> next;
        for (const auto& [u, m] : cur) {
            equal_multinomial(m, std::uint64_t(n_bits), cells, rng);
            for (int b = 0; b < n_bits; ++b)
                if (cells[b]) next[u ^ (std::uint64_t(1) << b)] += cells[b];
        }
        cur = std::move(next);
    }
    for (const auto& [u, m] : cur) out[u] += m;
}

// Places `children` offspring of a particle group on v, each moving
// independently according to the kernel.
void place_children(const KernelSpec& kernel, std::uint64_t v, std::uint64_t children,
                    Population& out, Xoshiro256& rng) {
    if (children == 0) return;
    if (children < kPerChildThreshold) {
        for (std::uint64_t i = 0; i < children; ++i) out.add(sample_neighbor(kernel, v, rng), 1);
        return;
    }
    switch (kernel.kind()) {
        case KernelKind::single_flip: {
            std::vector<std::uint64_t> cells;
            equal_multinomial(children, std::uint64_t(kernel.n_bits()), cells, rng);
            for (int b = 0; b < kernel.n_bits(); ++b)
                if (cells[b]) out.add(v ^ (std::uint64_t(1) << b), cells[b]);
            return;
        }
        case KernelKind::power: {
            std::map<std::uint64_t, std::uint64_t> placed;
            walk_uniform_flips(kernel.n_bits(), v, children, kernel.k(), placed, rng);
            for (const auto& [u, m] : placed) out.add(u, m);
            return;
        }
        case KernelKind::mixture: {
            // stratify by walk depth (uniform over 1..k), then walk each layer
            std::vector<std::uint64_t> layers;
            equal_multinomial(children, std::uint64_t(kernel.k()), layers, rng);
            std::map<std::uint64_t, std::uint64_t> placed;
            for (int depth = 1; depth <= kernel.k(); ++depth)
                if (layers[depth - 1])
                    walk_uniform_flips(kernel.n_bits(), v, layers[depth - 1], depth, placed, rng);
            for (const auto& [u, m] : placed) out.add(u, m);
            return;
        }
        case KernelKind::lazy: {
            const std::uint64_t staying = draw_binomial(children, kernel.p_stay(), rng);
            if (staying) out.add(v, staying);
            place_children(kernel.base(), v, children - staying, out, rng);
            return;
        }
        case KernelKind::complete: {
            const std::uint64_t n = kernel.state_count();
            std::vector<std::uint64_t> cells;
            equal_multinomial(children, n - 1, cells, rng);
            for (std::uint64_t j = 0; j + 1 < n; ++j)
                if (cells[j]) out.add(j >= v ? j + 1 : j, cells[j]);
            return;
        }
        case KernelKind::complete_bipartite: {
            const std::uint64_t half = kernel.state_count() / 2;
            const std::uint64_t offset = v < half ? half : 0;
            std::vector<std::uint64_t> cells;
            equal_multinomial(children, half, cells, rng);
            for (std::uint64_t j = 0; j < half; ++j)
                if (cells[j]) out.add(offset + j, cells[j]);
            return;
        }
        case KernelKind::explicit_matrix: {
            const DenseMatrix& m = kernel.matrix();
            std::vector<std::size_t> support;
            for (std::size_t j = 0; j < m.n; ++j)
                if (m.at(v, j) > 0.0) support.push_back(j);
            std::uint64_t remaining = children;
            double rest = 1.0;
            for (std::size_t s = 0; s + 1 < support.size() && remaining > 0; ++s) {
                const double pj = m.at(v, support[s]);
                const std::uint64_t x =
                    draw_binomial(remaining, std::clamp(pj / rest, 0.0, 1.0), rng);
                if (x) out.add(support[s], x);
                remaining -= x;
                rest -= pj;
            }
            if (remaining) out.add(support.back(), remaining);
            return;
        }
    }
}

bool state_fits_dense(const KernelSpec& kernel, int threshold_bits) {
    return kernel.state_count() <= (std::uint64_t(1) << threshold_bits);
}

void check_total_cap(std::uint64_t total, std::uint64_t factor, const char* what) {
    if (total > kTotalCap / factor)
        throw guard_error(std::string("population overflow guard: ") + what);
}

}  // namespace

std::vector<std::string> validate(const SimConfig& config) {
    std::vector<std::string> warnings;
    if (config.steps < 0) throw usage_error("config: steps must be >= 0");
    if (config.c < 1) throw usage_error("config: c must be >= 1");
    if (config.c == 1 && (config.mode == SimMode::simple || config.mode == SimMode::multiplicity))
        warnings.push_back("c = 1 degenerates to a plain random walk");
    if (config.start.empty()) throw usage_error("config: empty start set");
    if (config.snapshot_every && *config.snapshot_every < 1)
        throw usage_error("config: snapshot_every must be >= 1");
    for (const auto v : config.start)
        if (!config.kernel.valid_state(v)) throw usage_error("config: start vertex out of range");
    if (config.target && !config.kernel.on_hypercube())
        throw usage_error("config: affinity target requires a hypercube kernel");
    if (config.target && !config.kernel.valid_state(*config.target))
        throw usage_error("config: target vertex out of range");

    double growth_log2 = 0.0;
    switch (config.mode) {
        case SimMode::simple:
            break;
        case SimMode::multiplicity:
            growth_log2 = std::log2(double(config.c));
            break;
        case SimMode::division_rate:
            if (!(config.p > 0.0 && config.p < 1.0))
                throw usage_error("config: division rate p must lie in (0, 1)");
            growth_log2 = std::log2(1.0 + config.p);
            break;
        case SimMode::affinity_division: {
            if (!config.kernel.on_hypercube())
                throw usage_error("config: affinity division requires a hypercube kernel");
            if (!config.target) throw usage_error("config: affinity division requires a target");
            const std::size_t want = std::size_t(config.kernel.n_bits()) + 1;
            if (config.division_table.size() != want)
                throw usage_error("config: division table must have n_bits + 1 entries");
            double p_max = 0.0;
            bool warned_monotone = false;
            for (std::size_t i = 0; i < want; ++i) {
                const double p = config.division_table[i];
                if (p < 0.0 || p > 1.0)
                    throw usage_error("config: division table entries must lie in [0, 1]");
                if (i > 0 && p < config.division_table[i - 1] && !warned_monotone) {
                    warned_monotone = true;
                    warnings.push_back("division table is not monotone in affinity");
                }
                p_max = std::max(p_max, p);
            }
            growth_log2 = std::log2(1.0 + p_max);
            break;
        }
    }
    if (config.mode != SimMode::simple) {
        const double start_log2 = std::log2(double(config.start.size()));
        if (start_log2 + double(config.steps) * growth_log2 >= 63.0)
            throw guard_error("overflow horizon: steps * log2(growth rate) exceeds 63-bit counts");
    }
    return warnings;
}

ActiveSet::ActiveSet(std::uint64_t state_count, bool dense)
    : state_count_(state_count), dense_(dense) {
    if (dense_) bits_.assign(std::size_t((state_count + 63) / 64), 0);
}

bool ActiveSet::contains(std::uint64_t v) const {
    if (dense_) return (bits_[std::size_t(v / 64)] >> (v % 64)) & 1;
    return sparse_.count(v) != 0;
}

void ActiveSet::insert(std::uint64_t v) {
    if (dense_) {
        std::uint64_t& block = bits_[std::size_t(v / 64)];
        const std::uint64_t bit = std::uint64_t(1) << (v % 64);
        if (block & bit) return;
        block |= bit;
        ++size_;
    } else if (sparse_.insert(v).second) {
        ++size_;
    }
}

std::vector<std::uint64_t> ActiveSet::to_vector() const {
    std::vector<std::uint64_t> out;
    out.reserve(std::size_t(size_));
    for_each([&](std::uint64_t v) { out.push_back(v); });
    return out;
}

Population::Population(std::uint64_t state_count, bool dense)
    : state_count_(state_count), dense_(dense) {
    if (dense_) counts_.assign(std::size_t(state_count), 0);
}

std::uint64_t Population::count(std::uint64_t v) const {
    if (dense_) return counts_[std::size_t(v)];
    const auto it = sparse_.find(v);
    return it == sparse_.end() ? 0 : it->second;
}

void Population::add(std::uint64_t v, std::uint64_t m) {
    if (m == 0) return;
    if (total_ > kTotalCap - m) throw guard_error("population overflow: total exceeds 2^63");
    total_ += m;
    if (dense_) {
        if (counts_[std::size_t(v)] == 0) {
            occupied_list_.push_back(v);
            ++occupied_count_;
        }
        counts_[std::size_t(v)] += m;
    } else {
        auto [it, inserted] = sparse_.try_emplace(v, 0);
        if (inserted) ++occupied_count_;
        it->second += m;
    }
}

void Population::finalize() {
    if (dense_) std::sort(occupied_list_.begin(), occupied_list_.end());
}

ActiveSet step_simple(const ActiveSet& active, const KernelSpec& kernel, int c, Xoshiro256& rng) {
    if (active.size() == 0) throw usage_error("step_simple: empty active set");
    ActiveSet next(active.state_count(), active.dense());
    active.for_each([&](std::uint64_t v) {
        for (int i = 0; i < c; ++i) next.insert(sample_neighbor(kernel, v, rng));
    });
    return next;
}

Population step_multiplicity(const Population& pop, const KernelSpec& kernel, int c,
                             Xoshiro256& rng) {
    if (pop.total() == 0) throw usage_error("step_multiplicity: empty population");
    check_total_cap(pop.total(), std::uint64_t(c), "multiplicity step");
    Population next(pop.state_count(), pop.dense());
    pop.for_each([&](std::uint64_t v, std::uint64_t m) {
        place_children(kernel, v, std::uint64_t(c) * m, next, rng);
    });
    next.finalize();
    return next;
}

Population step_division_rate(const Population& pop, const KernelSpec& kernel, double p,
                              Xoshiro256& rng) {
    if (!(p > 0.0 && p < 1.0)) throw usage_error("step_division_rate: p must lie in (0, 1)");
    check_total_cap(pop.total(), 2, "division step");
    Population next(pop.state_count(), pop.dense());
    pop.for_each([&](std::uint64_t v, std::uint64_t m) {
        const std::uint64_t dividing = draw_binomial(m, p, rng);
        if (m - dividing) next.add(v, m - dividing);  // non-dividers stay put
        place_children(kernel, v, 2 * dividing, next, rng);
    });
    next.finalize();
    return next;
}

Population step_affinity_division(const Population& pop, const KernelSpec& kernel,
                                  std::span<const double> division_table, std::uint64_t target,
                                  Xoshiro256& rng) {
    const int n_bits = kernel.n_bits();
    if (division_table.size() != std::size_t(n_bits) + 1)
        throw usage_error("step_affinity_division: table must have n_bits + 1 entries");
    check_total_cap(pop.total(), 2, "affinity division step");
    Population next(pop.state_count(), pop.dense());
    pop.for_each([&](std::uint64_t v, std::uint64_t m) {
        const double rate = division_table[std::size_t(affinity_bits(v, target, n_bits))];
        const std::uint64_t dividing = draw_binomial(m, rate, rng);
        if (m - dividing) next.add(v, m - dividing);
        place_children(kernel, v, 2 * dividing, next, rng);
    });
    next.finalize();
    return next;
}

namespace {

void record_state(const SimConfig& config, const ActiveSet* active, const Population* pop, int t,
                  Trajectory& traj) {
    StepRecord rec;
    if (active) {
        rec.active_count = active->size();
        rec.population = active->size();
    } else {
        rec.active_count = pop->occupied();
        rec.population = pop->total();
    }
    if (config.target) {
        rec.affinity_hist.assign(std::size_t(config.kernel.n_bits()) + 1, 0);
        const std::uint64_t target = *config.target;
        const int n_bits = config.kernel.n_bits();
        if (active) {
            active->for_each([&](std::uint64_t v) {
                ++rec.affinity_hist[std::size_t(affinity_bits(v, target, n_bits))];
            });
        } else {
            pop->for_each([&](std::uint64_t v, std::uint64_t m) {
                rec.affinity_hist[std::size_t(affinity_bits(v, target, n_bits))] += m;
            });
        }
    }
    if (config.snapshot_every && *config.snapshot_every > 0 && t % *config.snapshot_every == 0) {
        std::vector<std::uint64_t> snap;
        if (active) {
            snap = active->to_vector();
        } else {
            snap.reserve(std::size_t(pop->occupied()));
            rec.snapshot_counts.reserve(std::size_t(pop->occupied()));
            pop->for_each([&](std::uint64_t v, std::uint64_t m) {
                snap.push_back(v);
                rec.snapshot_counts.push_back(m);
            });
        }
        rec.snapshot = std::move(snap);
    }
    traj.records.push_back(std::move(rec));
}

}  // namespace

Trajectory run_replica(const SimConfig& config, std::uint64_t replica) {
    validate(config);
    Xoshiro256 rng = replica_engine(config.seed, replica);
    const bool dense = state_fits_dense(config.kernel, config.dense_threshold_bits);

    Trajectory traj;
    traj.n_bits = config.kernel.on_hypercube() ? config.kernel.n_bits() : 0;
    traj.state_count = config.kernel.state_count();
    traj.multiplicity_semantics = config.mode != SimMode::simple;
    traj.records.reserve(std::size_t(config.steps) + 1);

    if (config.mode == SimMode::simple) {
        ActiveSet active(config.kernel.state_count(), dense);
        for (const auto v : config.start) active.insert(v);
        record_state(config, &active, nullptr, 0, traj);
        for (int t = 1; t <= config.steps; ++t) {
            active = step_simple(active, config.kernel, config.c, rng);
            record_state(config, &active, nullptr, t, traj);
        }
        return traj;
    }

    Population pop(config.kernel.state_count(), dense);
    for (const auto v : config.start) pop.add(v, 1);
    pop.finalize();
    record_state(config, nullptr, &pop, 0, traj);
    for (int t = 1; t <= config.steps; ++t) {
        try {
            switch (config.mode) {
                case SimMode::multiplicity:
                    pop = step_multiplicity(pop, config.kernel, config.c, rng);
                    break;
                case SimMode::division_rate:
                    pop = step_division_rate(pop, config.kernel, config.p, rng);
                    break;
                case SimMode::affinity_division:
                    pop = step_affinity_division(pop, config.kernel, config.division_table,
                                                 *config.target, rng);
                    break;
                default:
                    break;
            }
        } catch (const guard_error& e) {
            throw guard_error(std::string(e.what()) + " (step " + std::to_string(t) + ")");
        }
        record_state(config, nullptr, &pop, t, traj);
    }
    return traj;
}

std::vector<double> expectation_step(const std::vector<double>& dist, const KernelSpec& kernel,
                                     SimMode mode, int c, double p) {
    const std::size_t n = std::size_t(kernel.state_count());
    if (dist.size() != n) throw usage_error("expectation_step: distribution size mismatch");

    std::vector<double> moved(n, 0.0);
    // moved = M^T dist, built from the kernel structure where possible
    switch (kernel.kind()) {
        case KernelKind::single_flip: {
            const int n_bits = kernel.n_bits();
            const double inv = 1.0 / n_bits;
            for (std::size_t v = 0; v < n; ++v) {
                const double w = dist[v];
                if (w == 0.0) continue;
                for (int b = 0; b < n_bits; ++b) moved[v ^ (std::size_t(1) << b)] += w * inv;
            }
            break;
        }
        case KernelKind::power:
        case KernelKind::mixture: {
            const int n_bits = kernel.n_bits();
            const int k = kernel.k();
            const double inv = 1.0 / n_bits;
            std::vector<double> cur = dist;
            std::vector<double> next(n);
            if (kernel.kind() == KernelKind::mixture) std::fill(moved.begin(), moved.end(), 0.0);
            for (int i = 1; i <= k; ++i) {
                std::fill(next.begin(), next.end(), 0.0);
                for (std::size_t v = 0; v < n; ++v) {
                    const double w = cur[v];
                    if (w == 0.0) continue;
                    for (int b = 0; b < n_bits; ++b) next[v ^ (std::size_t(1) << b)] += w * inv;
                }
                cur.swap(next);
                if (kernel.kind() == KernelKind::mixture)
                    for (std::size_t v = 0; v < n; ++v) moved[v] += cur[v] / k;
            }
            if (kernel.kind() == KernelKind::power) moved = std::move(cur);
            break;
        }
        case KernelKind::lazy: {
            moved = expectation_step(dist, kernel.base(), SimMode::multiplicity, 1, 0.0);
            const double ps = kernel.p_stay();
            for (std::size_t v = 0; v < n; ++v) moved[v] = ps * dist[v] + (1.0 - ps) * moved[v];
            break;
        }
        case KernelKind::complete: {
            double sum = 0.0;
            for (const double w : dist) sum += w;
            const double inv = 1.0 / double(n - 1);
            for (std::size_t v = 0; v < n; ++v) moved[v] = (sum - dist[v]) * inv;
            break;
        }
        case KernelKind::complete_bipartite: {
            const std::size_t half = n / 2;
            double lo = 0.0, hi = 0.0;
            for (std::size_t v = 0; v < half; ++v) lo += dist[v];
            for (std::size_t v = half; v < n; ++v) hi += dist[v];
            for (std::size_t v = 0; v < half; ++v) moved[v] = hi / double(half);
            for (std::size_t v = half; v < n; ++v) moved[v] = lo / double(half);
            break;
        }
        case KernelKind::explicit_matrix: {
            const DenseMatrix& m = kernel.matrix();
            for (std::size_t i = 0; i < n; ++i) {
                const double w = dist[i];
                if (w == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j) moved[j] += w * m.at(i, j);
            }
            break;
        }
    }

    std::vector<double> out(n);
    if (mode == SimMode::division_rate) {
        for (std::size_t v = 0; v < n; ++v) out[v] = (1.0 - p) * dist[v] + 2.0 * p * moved[v];
    } else {
        for (std::size_t v = 0; v < n; ++v) out[v] = double(c) * moved[v];
    }
    return out;
}

std::vector<double> propagate_expectation(std::vector<double> dist, const KernelSpec& kernel,
                                          SimMode mode, int c, double p, int steps, bool normalize) {
    if (kernel.state_count() > kExpectationStateCap)
        throw guard_error("propagate_expectation: state space exceeds 2^20");
    for (const double w : dist)
        if (w < 0.0) throw usage_error("propagate_expectation: negative mass");
    if (mode == SimMode::division_rate && !(p > 0.0 && p < 1.0))
        throw usage_error("propagate_expectation: p must lie in (0, 1)");
    const double growth = mode == SimMode::division_rate ? 1.0 + p : double(c);
    for (int t = 0; t < steps; ++t) {
        dist = expectation_step(dist, kernel, mode, c, p);
        if (normalize)
            for (auto& w : dist) w /= growth;
    }
    return dist;
}

std::optional<int> partial_cover_time(const Trajectory& traj, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw usage_error("partial_cover_time: fraction out of (0, 1]");
    const double threshold = fraction * double(traj.state_count);
    for (std::size_t t = 0; t < traj.records.size(); ++t)
        if (double(traj.records[t].active_count) + 1e-9 >= threshold) return int(t);
    return std::nullopt;
}

std::optional<int> detect_full_cover(const Trajectory& traj) {
    for (std::size_t t = 0; t < traj.records.size(); ++t)
        if (traj.records[t].active_count == traj.state_count) return int(t);
    return std::nullopt;
}

}  // namespace brw
