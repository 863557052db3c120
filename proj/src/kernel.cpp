#include "brw/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "brw/errors.hpp"

namespace brw {

namespace {

constexpr std::uint64_t kDenseStateCap = 4096;

void require(bool ok, const std::string& msg) {
    if (!ok) throw usage_error(msg);
}

}  // namespace

KernelSpec KernelSpec::single_flip(int n_bits) {
    require(n_bits >= 1 && n_bits <= kMaxBits, "single_flip: n_bits out of [1, 62]");
    KernelSpec k;
    k.kind_ = KernelKind::single_flip;
    k.n_bits_ = n_bits;
    return k;
}

KernelSpec KernelSpec::power(int n_bits, int k) {
    require(n_bits >= 1 && n_bits <= kMaxBits, "power: n_bits out of [1, 62]");
    require(k >= 1, "power: k must be >= 1");
    KernelSpec s;
    s.kind_ = KernelKind::power;
    s.n_bits_ = n_bits;
    s.k_ = k;
    return s;
}

KernelSpec KernelSpec::mixture(int n_bits, int k) {
    require(n_bits >= 1 && n_bits <= kMaxBits, "mixture: n_bits out of [1, 62]");
    require(k >= 1 && k <= n_bits, "mixture: k out of [1, n_bits]");
    KernelSpec s;
    s.kind_ = KernelKind::mixture;
    s.n_bits_ = n_bits;
    s.k_ = k;
    return s;
}

KernelSpec KernelSpec::lazy(double p_stay, KernelSpec base) {
    require(p_stay > 0.0 && p_stay < 1.0, "lazy: p_stay must lie in (0, 1)");
    KernelSpec s;
    s.kind_ = KernelKind::lazy;
    s.n_bits_ = base.n_bits_;
    s.p_stay_ = p_stay;
    s.base_ = std::make_shared<const KernelSpec>(std::move(base));
    return s;
}

KernelSpec KernelSpec::complete(std::uint64_t n) {
    require(n >= 2, "complete: need at least 2 vertices");
    KernelSpec s;
    s.kind_ = KernelKind::complete;
    s.n_states_ = n;
    return s;
}

KernelSpec KernelSpec::complete_bipartite(std::uint64_t half) {
    require(half >= 1, "complete_bipartite: need at least 1 vertex per half");
    KernelSpec s;
    s.kind_ = KernelKind::complete_bipartite;
    s.n_states_ = 2 * half;
    return s;
}

KernelSpec KernelSpec::explicit_matrix(DenseMatrix m) {
    if (m.n == 0 || m.n > kDenseStateCap)
        throw guard_error("explicit_matrix: size guard, need 1 <= n <= 4096");
    for (std::size_t i = 0; i < m.n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.n; ++j) {
            require(m.at(i, j) >= 0.0, "explicit_matrix: negative entry");
            row += m.at(i, j);
        }
        require(std::abs(row - 1.0) <= 1e-12, "explicit_matrix: row " + std::to_string(i) + " not stochastic");
    }
    // connectivity of the undirected support
    {
        std::vector<char> seen(m.n, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t reached = 1;
        while (!stack.empty()) {
            std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < m.n; ++j) {
                if (!seen[j] && (m.at(i, j) > 0.0 || m.at(j, i) > 0.0)) {
                    seen[j] = 1;
                    ++reached;
                    stack.push_back(j);
                }
            }
        }
        if (reached != m.n)
            throw guard_error("explicit_matrix: support graph is disconnected");
    }
    auto cdf = std::make_shared<std::vector<double>>(m.n * m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m.n; ++j) {
            acc += m.at(i, j);
            (*cdf)[i * m.n + j] = acc;
        }
        (*cdf)[i * m.n + (m.n - 1)] = 1.0;
    }
    KernelSpec s;
    s.kind_ = KernelKind::explicit_matrix;
    s.n_states_ = m.n;
    s.matrix_ = std::make_shared<const DenseMatrix>(std::move(m));
    s.row_cdf_ = std::move(cdf);
    return s;
}

std::uint64_t KernelSpec::state_count() const {
    switch (kind_) {
        case KernelKind::single_flip:
        case KernelKind::power:
        case KernelKind::mixture:
            return std::uint64_t(1) << n_bits_;
        case KernelKind::lazy:
            return base_->state_count();
        default:
            return n_states_;
    }
}

bool KernelSpec::on_hypercube() const {
    switch (kind_) {
        case KernelKind::single_flip:
        case KernelKind::power:
        case KernelKind::mixture:
            return true;
        case KernelKind::lazy:
            return base_->on_hypercube();
        default:
            return false;
    }
}

std::uint64_t sample_neighbor(const KernelSpec& kernel, std::uint64_t v, Xoshiro256& rng) {
    if (!kernel.valid_state(v)) throw usage_error("sample_neighbor: vertex out of range");
    switch (kernel.kind()) {
        case KernelKind::single_flip: {
            std::uniform_int_distribution<int> bit(0, kernel.n_bits() - 1);
            return v ^ (std::uint64_t(1) << bit(rng));
        }
        case KernelKind::power: {
            std::uniform_int_distribution<int> bit(0, kernel.n_bits() - 1);
            for (int i = 0; i < kernel.k(); ++i) v ^= std::uint64_t(1) << bit(rng);
            return v;
        }
        case KernelKind::mixture: {
            std::uniform_int_distribution<int> depth(1, kernel.k());
            std::uniform_int_distribution<int> bit(0, kernel.n_bits() - 1);
            const int d = depth(rng);
            for (int i = 0; i < d; ++i) v ^= std::uint64_t(1) << bit(rng);
            return v;
        }
        case KernelKind::lazy: {
            std::bernoulli_distribution stay(kernel.p_stay());
            return stay(rng) ? v : sample_neighbor(kernel.base(), v, rng);
        }
        case KernelKind::complete: {
            std::uniform_int_distribution<std::uint64_t> pick(0, kernel.state_count() - 2);
            const std::uint64_t u = pick(rng);
            return u >= v ? u + 1 : u;
        }
        case KernelKind::complete_bipartite: {
            const std::uint64_t half = kernel.state_count() / 2;
            std::uniform_int_distribution<std::uint64_t> pick(0, half - 1);
            return v < half ? half + pick(rng) : pick(rng);
        }
        case KernelKind::explicit_matrix: {
            const std::size_t n = kernel.matrix().n;
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double u = unit(rng);
            const auto first = kernel.row_cdf_->begin() + std::ptrdiff_t(v * n);
            const auto it = std::lower_bound(first, first + std::ptrdiff_t(n), u);
            return std::uint64_t(std::min<std::ptrdiff_t>(it - first, std::ptrdiff_t(n) - 1));
        }
    }
    throw usage_error("sample_neighbor: unknown kernel");
}

namespace {

// result <- result * P for the single-flip kernel, using its sparsity.
void multiply_by_single_flip(DenseMatrix& m, int n_bits) {
    const std::size_t n = m.n;
    const double inv = 1.0 / n_bits;
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double w = m.at(i, j);
            if (w == 0.0) continue;
            for (int b = 0; b < n_bits; ++b) row[j ^ (std::size_t(1) << b)] += w * inv;
        }
        for (std::size_t j = 0; j < n; ++j) m.at(i, j) = row[j];
    }
}

}  // namespace

DenseMatrix dense_matrix(const KernelSpec& kernel) {
    const std::uint64_t states = kernel.state_count();
    if (states > kDenseStateCap)
        throw guard_error("dense_matrix: size guard, state space exceeds 4096");
    const std::size_t n = std::size_t(states);
    switch (kernel.kind()) {
        case KernelKind::single_flip: {
            DenseMatrix m(n);
            const double inv = 1.0 / kernel.n_bits();
            for (std::size_t v = 0; v < n; ++v)
                for (int b = 0; b < kernel.n_bits(); ++b) m.at(v, v ^ (std::size_t(1) << b)) = inv;
            return m;
        }
        case KernelKind::power: {
            DenseMatrix m = dense_matrix(KernelSpec::single_flip(kernel.n_bits()));
            for (int i = 1; i < kernel.k(); ++i) multiply_by_single_flip(m, kernel.n_bits());
            return m;
        }
        case KernelKind::mixture: {
            DenseMatrix cur = dense_matrix(KernelSpec::single_flip(kernel.n_bits()));
            DenseMatrix acc(n);
            const double w = 1.0 / kernel.k();
            for (int i = 1; i <= kernel.k(); ++i) {
                if (i > 1) multiply_by_single_flip(cur, kernel.n_bits());
                for (std::size_t p = 0; p < cur.a.size(); ++p) acc.a[p] += w * cur.a[p];
            }
            return acc;
        }
        case KernelKind::lazy: {
            DenseMatrix m = dense_matrix(kernel.base());
            for (auto& x : m.a) x *= 1.0 - kernel.p_stay();
            for (std::size_t v = 0; v < n; ++v) m.at(v, v) += kernel.p_stay();
            return m;
        }
        case KernelKind::complete: {
            DenseMatrix m(n);
            const double inv = 1.0 / double(n - 1);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) m.at(i, j) = i == j ? 0.0 : inv;
            return m;
        }
        case KernelKind::complete_bipartite: {
            DenseMatrix m(n);
            const std::size_t half = n / 2;
            const double inv = 1.0 / double(half);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if ((i < half) != (j < half)) m.at(i, j) = inv;
            return m;
        }
        case KernelKind::explicit_matrix:
            return kernel.matrix();
    }
    throw usage_error("dense_matrix: unknown kernel");
}

std::uint64_t binomial_coefficient(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * std::uint64_t(n - k + i) / std::uint64_t(i);
    return r;
}

namespace {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out;
    if (__builtin_add_overflow(a, b, &out))
        throw guard_error("mixture_degree: value exceeds 64 bits");
    return out;
}

std::uint64_t mixture_degree_memo(int n, int k, std::map<std::pair<int, int>, std::uint64_t>& memo) {
    if (k == n) {
        if (n >= 64) throw guard_error("mixture_degree: value exceeds 64 bits");
        return std::uint64_t(1) << n;
    }
    if (k == 1) return std::uint64_t(n);
    const auto key = std::make_pair(n, k);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::uint64_t value =
        k == 2 ? checked_add(std::uint64_t(n), mixture_degree_memo(n - 1, 2, memo))
               : checked_add(mixture_degree_memo(n - 1, k - 1, memo),
                             mixture_degree_memo(n - 1, k, memo));
    memo[key] = value;
    return value;
}

}  // namespace

std::uint64_t mixture_degree(int n_bits, int k) {
    require(n_bits >= 2, "mixture_degree: n_bits must be >= 2");
    require(k >= 1 && k <= n_bits, "mixture_degree: k out of [1, n_bits]");
    std::map<std::pair<int, int>, std::uint64_t> memo;
    return mixture_degree_memo(n_bits, k, memo);
}

std::uint64_t degree(const KernelSpec& kernel) {
    switch (kernel.kind()) {
        case KernelKind::single_flip:
            return std::uint64_t(kernel.n_bits());
        case KernelKind::power: {
            // distances reachable by k flips: h <= min(k, N) with h = k (mod 2)
            const int n = kernel.n_bits();
            const int top = std::min(kernel.k(), n);
            std::uint64_t total = 0;
            for (int h = kernel.k() % 2; h <= top; h += 2) total += binomial_coefficient(n, h);
            return total;
        }
        case KernelKind::mixture:
            return kernel.n_bits() == 1 ? 1 : mixture_degree(kernel.n_bits(), kernel.k());
        case KernelKind::lazy: {
            const std::uint64_t base = degree(kernel.base());
            return transition_support(kernel.base(), 0, 0) ? base : base + 1;
        }
        case KernelKind::complete:
            return kernel.state_count() - 1;
        case KernelKind::complete_bipartite:
            return kernel.state_count() / 2;
        case KernelKind::explicit_matrix: {
            const DenseMatrix& m = kernel.matrix();
            std::uint64_t count = 0;
            for (std::size_t j = 0; j < m.n; ++j)
                if (m.at(0, j) > 0.0) ++count;
            return count;
        }
    }
    throw usage_error("degree: unknown kernel");
}

Rational min_nonzero_entry_power(int n_bits, int i) {
    if (n_bits < 1) throw usage_error("min_nonzero_entry_power: n_bits must be >= 1");
    if (i < 0 || i > n_bits) throw usage_error("min_nonzero_entry_power: i out of [0, n_bits]");
    if (i == 0) return {1, 1};
    std::int64_t num = 1;
    for (int f = 2; f <= i; ++f) {
        if (num > std::numeric_limits<std::int64_t>::max() / f)
            throw guard_error("min_nonzero_entry_power: i! exceeds 64 bits, use the double form");
        num *= f;
    }
    std::int64_t den = 1;
    for (int f = 0; f < i; ++f) {
        if (den > std::numeric_limits<std::int64_t>::max() / n_bits)
            throw guard_error("min_nonzero_entry_power: N^i exceeds 64 bits, use the double form");
        den *= n_bits;
    }
    const std::int64_t g = std::gcd(num, den);
    return {num / g, den / g};
}

double min_nonzero_entry_power_value(int n_bits, int i) {
    if (n_bits < 1) throw usage_error("min_nonzero_entry_power: n_bits must be >= 1");
    if (i < 0 || i > n_bits) throw usage_error("min_nonzero_entry_power: i out of [0, n_bits]");
    if (i == 0) return 1.0;
    return std::exp(std::lgamma(double(i) + 1.0) - double(i) * std::log(double(n_bits)));
}

namespace {

// BFS two-coloring over the dense support; also checks connectivity.
bool bipartite_bfs(const DenseMatrix& m) {
    std::vector<int> color(m.n, -1);
    std::vector<std::size_t> queue{0};
    color[0] = 0;
    std::size_t reached = 1;
    bool bipartite = true;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const std::size_t i = queue[qi];
        for (std::size_t j = 0; j < m.n; ++j) {
            if (m.at(i, j) == 0.0 && m.at(j, i) == 0.0) continue;
            if (color[j] == -1) {
                color[j] = 1 - color[i];
                ++reached;
                queue.push_back(j);
            } else if (color[j] == color[i]) {
                bipartite = false;
            }
        }
    }
    if (reached != m.n) throw guard_error("is_bipartite: support graph is disconnected");
    return bipartite;
}

}  // namespace

bool is_bipartite(const KernelSpec& kernel) {
    if (kernel.state_count() <= kDenseStateCap) return bipartite_bfs(dense_matrix(kernel));
    // Closed-form families beyond the dense cap; cross-checked against the
    // BFS path at small sizes in the test suite.
    switch (kernel.kind()) {
        case KernelKind::single_flip:
            return true;
        case KernelKind::power:
            if (kernel.k() % 2 == 0)
                throw guard_error("is_bipartite: even-power support splits into parity classes (disconnected)");
            return true;
        case KernelKind::mixture:
            return kernel.k() == 1;
        case KernelKind::lazy:
            is_bipartite(kernel.base());  // propagate disconnected bases
            return false;                 // self loops are odd cycles
        case KernelKind::complete:
            return kernel.state_count() == 2;
        case KernelKind::complete_bipartite:
            return true;
        default:
            throw guard_error("is_bipartite: state space exceeds the analysis cap");
    }
}

bool transition_support(const KernelSpec& kernel, std::uint64_t v, std::uint64_t w) {
    if (!kernel.valid_state(v) || !kernel.valid_state(w))
        throw usage_error("transition_support: vertex out of range");
    switch (kernel.kind()) {
        case KernelKind::single_flip:
            return hamming_bits(v, w) == 1;
        case KernelKind::power: {
            const int h = hamming_bits(v, w);
            return h % 2 == kernel.k() % 2 && h <= std::min(kernel.k(), kernel.n_bits());
        }
        case KernelKind::mixture: {
            const int h = hamming_bits(v, w);
            return (h >= 1 && h <= kernel.k()) || (h == 0 && kernel.k() >= 2);
        }
        case KernelKind::lazy:
            return v == w || transition_support(kernel.base(), v, w);
        case KernelKind::complete:
            return v != w;
        case KernelKind::complete_bipartite:
            return (v < kernel.state_count() / 2) != (w < kernel.state_count() / 2);
        case KernelKind::explicit_matrix:
            return kernel.matrix().at(v, w) > 0.0;
    }
    throw usage_error("transition_support: unknown kernel");
}

std::uint64_t common_neighbor_count(const KernelSpec& kernel, std::span<const std::uint64_t> vertices) {
    if (kernel.state_count() > 64)
        throw guard_error("common_neighbor_count: exhaustive bound is 64 states");
    if (vertices.empty()) throw usage_error("common_neighbor_count: empty vertex set");
    std::uint64_t mask = ~std::uint64_t(0) >> (64 - kernel.state_count());
    for (const std::uint64_t v : vertices) {
        std::uint64_t nb = 0;
        for (std::uint64_t w = 0; w < kernel.state_count(); ++w)
            if (transition_support(kernel, v, w)) nb |= std::uint64_t(1) << w;
        mask &= nb;
    }
    return std::popcount(mask);
}

std::uint64_t max_common_neighbors(const KernelSpec& kernel, int s) {
    if (kernel.kind() != KernelKind::single_flip)
        throw usage_error("max_common_neighbors: single_flip kernels only");
    if (kernel.n_bits() > 5) throw guard_error("max_common_neighbors: exhaustive bound is n_bits <= 5");
    if (s < 2 || s > 4) throw usage_error("max_common_neighbors: s out of [2, 4]");
    const std::uint64_t n = kernel.state_count();
    std::vector<std::uint64_t> neighbor_mask(n, 0);
    for (std::uint64_t v = 0; v < n; ++v)
        for (int b = 0; b < kernel.n_bits(); ++b)
            neighbor_mask[v] |= std::uint64_t(1) << (v ^ (std::uint64_t(1) << b));

    std::uint64_t best = 0;
    std::vector<std::uint64_t> idx(s);
    // iterate all s-combinations of {0..n-1}
    for (int i = 0; i < s; ++i) idx[i] = std::uint64_t(i);
    while (true) {
        std::uint64_t mask = ~std::uint64_t(0);
        for (const std::uint64_t v : idx) mask &= neighbor_mask[v];
        best = std::max<std::uint64_t>(best, std::popcount(mask));
        int pos = s - 1;
        while (pos >= 0 && idx[pos] == n - std::uint64_t(s - pos)) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int j = pos + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
    }
    return best;
}

}  // namespace brw
