#include "brw/spectral.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "brw/errors.hpp"

namespace brw {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw usage_error(msg);
}

}  // namespace

double lambda2_mixture(int n_bits, int k) {
    require(n_bits >= 2, "lambda2_mixture: n_bits must be >= 2");
    require(k >= 1 && k <= n_bits, "lambda2_mixture: k out of [1, n_bits]");
    const double n = double(n_bits);
    return ((n - 2.0) / (2.0 * k)) * (1.0 - std::pow((n - 2.0) / n, double(k)));
}

SpectrumSummary spectrum_summary(const KernelSpec& kernel) {
    SpectrumSummary s;
    s.degree = degree(kernel);
    s.state_count = kernel.state_count();
    switch (kernel.kind()) {
        case KernelKind::single_flip: {
            const double n = double(kernel.n_bits());
            s.lambda2 = (n - 2.0) / n;
            s.bipartite = true;
            return s;
        }
        case KernelKind::power: {
            // eigenvalues are ((N-2s)/N)^k; for even k the parity classes are
            // closed, so eigenvalue 1 has multiplicity 2
            const double n = double(kernel.n_bits());
            const bool odd = kernel.k() % 2 == 1;
            s.lambda2 = odd ? std::pow((n - 2.0) / n, double(kernel.k())) : 1.0;
            s.bipartite = odd;
            return s;
        }
        case KernelKind::mixture:
            s.lambda2 = lambda2_mixture(kernel.n_bits(), kernel.k());
            s.bipartite = kernel.k() == 1;
            return s;
        case KernelKind::lazy: {
            const SpectrumSummary base = spectrum_summary(kernel.base());
            s.lambda2 = kernel.p_stay() + (1.0 - kernel.p_stay()) * base.lambda2;
            s.bipartite = false;
            return s;
        }
        case KernelKind::complete:
            s.lambda2 = -1.0 / double(kernel.state_count() - 1);
            s.bipartite = kernel.state_count() == 2;
            return s;
        case KernelKind::complete_bipartite:
            s.lambda2 = 0.0;
            s.bipartite = true;
            return s;
        case KernelKind::explicit_matrix:
            throw usage_error("spectrum_summary: no closed form for explicit matrices");
    }
    throw usage_error("spectrum_summary: unknown kernel");
}

double tanner_bound(std::uint64_t set_size, std::uint64_t n, double lambda_normalized) {
    require(set_size > 0, "tanner_bound: set size must be positive");
    if (2 * set_size > n) throw usage_error("tanner_bound: set size exceeds n/2");
    require(lambda_normalized >= 0.0 && lambda_normalized < 1.0,
            "tanner_bound: normalized eigenvalue out of [0, 1)");
    const double l2 = lambda_normalized * lambda_normalized;
    const double frac = double(set_size) / double(n);
    return double(set_size) / (l2 + (1.0 - l2) * frac);
}

double alpha_from_lambda(double lambda2, double delta) {
    require(lambda2 >= 0.0 && lambda2 < 1.0, "alpha_from_lambda: lambda2 out of [0, 1)");
    if (!(delta > 0.0 && delta <= 0.5)) throw usage_error("alpha_from_lambda: delta out of (0, 1/2]");
    return 1.0 / (lambda2 * lambda2 * (1.0 - delta) + delta);
}

RThreshold r_threshold(int n_bits) {
    if (n_bits < 3) throw usage_error("r_threshold: n_bits must be >= 3");
    const double n = double(n_bits);
    const double e2 = std::exp(-2.0);
    const double en = std::exp(-2.0 / n);
    RThreshold r;
    r.exact = (n * e2 + n - 1.0 - n * en) / (e2 + n - 1.0 - n * en);
    r.simplified = (n * n * e2 + n - 2.0) / (n * e2 + n - 2.0);
    const double c = std::ceil(r.simplified);
    r.integer = int(std::min(std::max(c, 1.0), n));
    return r;
}

double r_of_nu(int n_bits, double nu) {
    require(n_bits >= 3, "r_of_nu: n_bits must be >= 3");
    require(nu > 0.0, "r_of_nu: nu must be positive");
    const double n = double(n_bits);
    const double e2 = std::exp(-2.0);
    const double en = std::exp(-2.0 / n);
    return (nu * (n - 1.0) + n * e2 - n * en + n - 1.0) / (e2 - n * en + n - 1.0);
}

double nu_max(int n_bits) {
    require(n_bits >= 3, "nu_max: n_bits must be >= 3");
    const double n = double(n_bits);
    return n - 1.0 - n * std::exp(-2.0 / n);
}

CoverageDelta delta_mixture(int n_bits, int k) {
    require(n_bits >= 3, "delta_mixture: n_bits must be >= 3");
    require(k >= 1 && k <= n_bits, "delta_mixture: k out of [1, n_bits]");
    if (k == 1) {
        const double v = std::pow(2.0, -double(r_threshold(n_bits).integer));
        return {v, v};
    }
    double mean_min_entry = 0.0;
    for (int i = 1; i <= k; ++i) mean_min_entry += min_nonzero_entry_power_value(n_bits, i);
    mean_min_entry /= double(k);
    const double d = double(mixture_degree(n_bits, k));
    const double lambda = lambda2_mixture(n_bits, k);
    const double l2 = lambda * lambda;
    const double far = std::exp(-2.0 * mean_min_entry * d);  // flushes to 0 at large N
    const double near = std::exp(-2.0 * mean_min_entry);
    const double num = far - d * near + d - 1.0;
    const double den = (1.0 - l2) * (d * far - d * near + d - 1.0);
    const double raw = num / den - l2 / (1.0 - l2);
    CoverageDelta out;
    out.raw = std::min(raw, 1.0);
    out.usable = std::min(out.raw, 0.5);
    return out;
}

CoverageDelta delta_ceiling(std::uint64_t d, double lambda2) {
    require(d >= 2, "delta_ceiling: degree must be >= 2");
    require(lambda2 >= 0.0 && lambda2 < 1.0, "delta_ceiling: lambda2 out of [0, 1)");
    const double dd = double(d);
    const double e2 = std::exp(-2.0);
    const double l2 = lambda2 * lambda2;
    const double raw = (dd * e2 + dd - 2.0) / ((1.0 - l2) * (dd * dd * e2 + dd - 2.0)) - l2 / (1.0 - l2);
    CoverageDelta out;
    out.raw = raw;
    out.usable = std::min(std::max(raw, 0.0), 0.5);
    return out;
}

CoverThresholds cover_thresholds(int n_bits, int k) {
    const RThreshold r = r_threshold(n_bits);
    const CoverageDelta delta = delta_mixture(n_bits, k);
    const double lambda = lambda2_mixture(n_bits, k);
    const std::uint64_t d = mixture_degree(n_bits, k);
    CoverThresholds t;
    t.r_exact = r.exact;
    t.r_simplified = r.simplified;
    t.delta_raw = delta.raw;
    t.delta_usable = delta.usable;
    t.delta_ceiling = delta_ceiling(d, std::abs(lambda)).usable;
    t.nu_max = nu_max(n_bits);
    return t;
}

bool verify_expander_bruteforce(const KernelSpec& single_flip, int r) {
    if (single_flip.kind() != KernelKind::single_flip)
        throw usage_error("verify_expander_bruteforce: single_flip kernels only");
    const int n_bits = single_flip.n_bits();
    if (n_bits > 4) throw guard_error("verify_expander_bruteforce: exhaustive bound is n_bits <= 4");
    if (r < 1 || r > n_bits) throw usage_error("verify_expander_bruteforce: r out of [1, n_bits]");

    const std::uint64_t n = std::uint64_t(1) << n_bits;
    std::vector<std::uint64_t> neighbor_mask(n, 0);
    for (std::uint64_t v = 0; v < n; ++v)
        for (int b = 0; b < n_bits; ++b)
            neighbor_mask[v] |= std::uint64_t(1) << (v ^ (std::uint64_t(1) << b));

    const std::uint64_t size_cap = std::uint64_t(1) << (n_bits - r);
    const std::uint64_t subsets = std::uint64_t(1) << n;
    for (std::uint64_t s = 1; s < subsets; ++s) {
        const int size = std::popcount(s);
        if (std::uint64_t(size) > size_cap) continue;
        std::uint64_t nb = 0;
        std::uint64_t rest = s;
        while (rest) {
            const int v = std::countr_zero(rest);
            rest &= rest - 1;
            nb |= neighbor_mask[v];
        }
        if (std::popcount(nb) < r * size) return false;
    }
    return true;
}

}  // namespace brw
