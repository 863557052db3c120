#include "brw/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "brw/errors.hpp"

namespace brw {

namespace {

constexpr int kGammaMaxIter = 500;
constexpr double kGammaEps = 1e-15;

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int i = 0; i < kGammaMaxIter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kGammaEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kGammaMaxIter; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kGammaEps) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_p: need a > 0 and x >= 0");
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: need a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

double chi_square_pvalue(double statistic, int dof) {
    if (dof < 1) throw std::invalid_argument("chi_square_pvalue: dof must be >= 1");
    if (statistic < 0.0) return 1.0;
    return gamma_q(double(dof) / 2.0, statistic / 2.0);
}

GofResult chi_square_gof(std::span<const std::uint64_t> observed,
                         std::span<const double> expected_probs) {
    if (observed.size() != expected_probs.size())
        throw usage_error("chi_square_gof: length mismatch");
    std::uint64_t total = 0;
    for (const auto o : observed) total += o;
    if (total == 0) throw usage_error("chi_square_gof: no observations");

    // pool forward until each group's expected count reaches 5
    std::vector<double> exp_groups;
    std::vector<double> obs_groups;
    double e_acc = 0.0, o_acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        e_acc += expected_probs[i] * double(total);
        o_acc += double(observed[i]);
        if (e_acc >= 5.0) {
            exp_groups.push_back(e_acc);
            obs_groups.push_back(o_acc);
            e_acc = 0.0;
            o_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (exp_groups.empty()) {
            exp_groups.push_back(e_acc);
            obs_groups.push_back(o_acc);
        } else {
            exp_groups.back() += e_acc;
            obs_groups.back() += o_acc;
        }
    }
    if (exp_groups.size() < 2) throw usage_error("chi_square_gof: degenerate single-cell input");

    GofResult r;
    r.cells = exp_groups.size();
    r.dof = int(exp_groups.size()) - 1;
    for (std::size_t g = 0; g < exp_groups.size(); ++g) {
        const double diff = obs_groups[g] - exp_groups[g];
        r.statistic += diff * diff / exp_groups[g];
    }
    r.p_value = chi_square_pvalue(r.statistic, r.dof);
    return r;
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw usage_error("tv_distance: length mismatch");
    double sum_a = 0.0, sum_b = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum_a += a[i];
        sum_b += b[i];
        diff += std::abs(a[i] - b[i]);
    }
    if (std::abs(sum_a - 1.0) > 1e-9 || std::abs(sum_b - 1.0) > 1e-9)
        throw usage_error("tv_distance: inputs are not normalized");
    return diff / 2.0;
}

Aggregate aggregate(std::span<const Trajectory> runs, std::string config_digest) {
    if (runs.size() < 2) throw usage_error("aggregate: need at least 2 replicas");
    const std::size_t steps = runs[0].records.size();
    for (const auto& t : runs)
        if (t.records.size() != steps) throw usage_error("aggregate: trajectory length mismatch");

    Aggregate agg;
    agg.config_digest = std::move(config_digest);
    agg.replicas = int(runs.size());
    agg.per_step.resize(steps);
    const double n = double(runs.size());
    const bool has_hist = !runs[0].records[0].affinity_hist.empty();
    if (has_hist)
        agg.pooled_affinity.assign(steps,
                                   std::vector<std::uint64_t>(runs[0].records[0].affinity_hist.size(), 0));

    for (std::size_t t = 0; t < steps; ++t) {
        double s_sum = 0.0, z_sum = 0.0;
        for (const auto& run : runs) {
            s_sum += double(run.records[t].active_count);
            z_sum += double(run.records[t].population);
            if (has_hist)
                for (std::size_t a = 0; a < run.records[t].affinity_hist.size(); ++a)
                    agg.pooled_affinity[t][a] += run.records[t].affinity_hist[a];
        }
        const double s_mean = s_sum / n;
        const double z_mean = z_sum / n;
        double s_var = 0.0, z_var = 0.0;
        for (const auto& run : runs) {
            const double ds = double(run.records[t].active_count) - s_mean;
            const double dz = double(run.records[t].population) - z_mean;
            s_var += ds * ds;
            z_var += dz * dz;
        }
        s_var /= n - 1.0;
        z_var /= n - 1.0;
        agg.per_step[t] = {s_mean, std::sqrt(s_var / n), z_mean, std::sqrt(z_var / n)};
    }
    return agg;
}

std::vector<Trajectory> run_replicas(const SimConfig& config, int replicas, std::uint64_t seed,
                                     int threads) {
    if (replicas < 1) throw usage_error("run_replicas: need at least 1 replica");
    SimConfig cfg = config;
    cfg.seed = seed;
    validate(cfg);

    if (threads <= 0) threads = int(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, replicas));

    std::vector<Trajectory> results(static_cast<std::size_t>(replicas));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(replicas));
    auto worker = [&](int worker_id) {
        for (int r = worker_id; r < replicas; r += threads) {
            try {
                results[std::size_t(r)] = run_replica(cfg, std::uint64_t(r));
            } catch (...) {
                failures[std::size_t(r)] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(threads));
        for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }
    for (int r = 0; r < replicas; ++r) {
        if (!failures[std::size_t(r)]) continue;
        try {
            std::rethrow_exception(failures[std::size_t(r)]);
        } catch (const guard_error& e) {
            throw guard_error("replica " + std::to_string(r) + ": " + e.what());
        } catch (const std::exception& e) {
            throw usage_error("replica " + std::to_string(r) + ": " + e.what());
        }
    }
    return results;
}

Aggregate monte_carlo(const SimConfig& config, int replicas, std::uint64_t seed, int threads) {
    if (replicas < 2) throw usage_error("monte_carlo: need at least 2 replicas");
    const auto runs = run_replicas(config, replicas, seed, threads);
    return aggregate(runs, "");
}

}  // namespace brw
