#pragma once

#include <cstdint>

#include "brw/kernel.hpp"

namespace brw {

// Closed-form spectral facts for a kernel family member.
struct SpectrumSummary {
    double lambda2 = 0.0;  // second largest (signed) eigenvalue
    std::uint64_t degree = 0;
    std::uint64_t state_count = 0;
    bool bipartite = false;
};

// Second largest eigenvalue of the depth-mixture kernel on n_bits bits:
// ((N-2)/(2k)) * (1 - ((N-2)/N)^k); reduces to (N-2)/N at k = 1.
double lambda2_mixture(int n_bits, int k);

// Closed-form spectrum for the kernel families (no general eigensolver).
SpectrumSummary spectrum_summary(const KernelSpec& kernel);

// Spectral lower bound on |N(S)| for a regular graph with n vertices whose
// relevant eigenvalue, normalized by the degree, is lambda_normalized:
//   |S| / (lambda^2 + (1 - lambda^2) |S|/n).
double tanner_bound(std::uint64_t set_size, std::uint64_t n, double lambda_normalized);

// Expansion factor guaranteed for sets of size <= delta * n:
//   alpha = 1 / (lambda2^2 (1 - delta) + delta).
double alpha_from_lambda(double lambda2, double delta);

// Size exponent thresholds for exponential growth of the active set under
// the single-flip kernel. The integer exponent used by experiments is
// ceil(simplified), clamped to [1, n_bits].
struct RThreshold {
    double exact = 0.0;
    double simplified = 0.0;
    int integer = 0;
};
RThreshold r_threshold(int n_bits);

// Exponent needed to sustain per-step growth rate 1 + nu.
double r_of_nu(int n_bits, double nu);
// Largest growth rate nu with r(nu) <= n_bits; always <= 1.
double nu_max(int n_bits);

// Coverage fraction certified for the depth-k mixture kernel in linear time.
// `raw` is the closed-form value clamped to (0, 1]; `usable` additionally
// honors the set-size restriction delta <= 1/2 (k >= 2 only; at k = 1 the
// value is 2^-r with r = r_threshold(n).integer).
struct CoverageDelta {
    double raw = 0.0;
    double usable = 0.0;
};
CoverageDelta delta_mixture(int n_bits, int k);

// Coverage ceiling for any d-regular connected non-bipartite kernel with
// second eigenvalue lambda2; usable value is clamped into [0, 1/2].
CoverageDelta delta_ceiling(std::uint64_t d, double lambda2);

// Grouped thresholds for one (n_bits, k) row of the bounds table.
struct CoverThresholds {
    double r_exact = 0.0;
    double r_simplified = 0.0;
    double delta_raw = 0.0;
    double delta_usable = 0.0;
    double delta_ceiling = 0.0;
    double nu_max = 0.0;
};
CoverThresholds cover_thresholds(int n_bits, int k);

// Exhaustively checks that every vertex subset S of the n_bits-hypercube with
// |S| <= 2^(n_bits - r) has |N(S)| >= r |S|. n_bits <= 4.
bool verify_expander_bruteforce(const KernelSpec& single_flip, int r);

}  // namespace brw
