#ifndef LEVYGLASS_EXACT_HPP
#define LEVYGLASS_EXACT_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "levyglass/model.hpp"

namespace levyglass {

// Hard ceiling for full enumeration (cost O(n 2^n)); experiments default to
// much smaller sizes.
inline constexpr int enumeration_cap = 30;

// A +-1 assignment to n sites packed into a binary word; bit i-1 set means
// sigma_i = +1.
struct SpinConfig {
    int n = 0;
    std::uint32_t bits = 0;

    int spin(int site) const { return (bits >> (site - 1)) & 1u ? 1 : -1; }
};

struct ExactSummary {
    double log_z = 0.0;
    int n = 0;
    double beta = 1.0;
    double scaled_weight_sum = 0.0;  // sum_a |w_a| * norm_size^(-1/alpha)

    // n log 2 - beta * scaled_weight_sum <= log_z <= n log 2 + beta * (same).
    bool sandwich_holds(double slack = 1e-9) const;
};

// Exact log of sum_sigma exp(beta H(sigma)) by Gray-code enumeration with
// incremental energy updates and max-shifted compensated accumulation.
ExactSummary log_partition(const ModelInstance& inst);

// Exact Gibbs average of an arbitrary configuration function.
double gibbs_expectation(const ModelInstance& inst,
                         const std::function<double(const SpinConfig&)>& f);

// Gibbs probability that sigma_i = sigma_j.
double agree_probability(const ModelInstance& inst, int i, int j);

// All pairwise agreement probabilities, indexed [i][j] with 1-based sites;
// diagonal entries are 1. One shared enumeration instead of n^2/2 separate ones.
std::vector<std::vector<double>> agreement_matrix(const ModelInstance& inst);

// Equivalence classes of sites under "spins agree in every replica", plus the
// pairing map onto the class with all spins opposite (-1 when absent).
struct ReplicaClasses {
    int k = 0;
    int n = 0;
    std::vector<std::vector<int>> classes;  // 1-based site lists
    std::vector<int> partner;               // index into classes, or -1
};

ReplicaClasses replica_partition(const std::vector<SpinConfig>& replicas);

struct PairCertificate {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

// Both sides of the block-decomposition inequality for one class pair, from
// intersection counts with the blocks A = [1, n1], B = [n1+1, n]. An absent
// partner enters as an empty class.
PairCertificate convexity_pair(long long os_in_a, long long os_in_b, long long or_in_a,
                               long long or_in_b, int n1, int n2);

// Certificate for the class at `class_index` and its partner; throws
// not_applicable when the partner is missing.
PairCertificate convexity_pair_certificate(const ReplicaClasses& classes,
                                           std::size_t class_index, int n1, int n2);

// Certificates for every paired class (each pair reported once).
std::vector<PairCertificate> convexity_certificate(const ReplicaClasses& classes, int n1,
                                                   int n2);

struct StepGap {
    double gap_r = 0.0;          // extra edge uniform over all pairs
    double gap_r_minus_1 = 0.0;  // extra edge by the two-step block rule
};

// Exact expected log-partition gain of one extra edge of scaled magnitude x
// with a symmetric sign, under the uniform-pair law versus the two-step
// block law. The finite-size content of the interpolation step: gap_r >=
// gap_r_minus_1 for every base instance.
StepGap interpolation_step_gap(const ModelInstance& base, double x, int n1);

// Exact per-instance Jensen sandwich for a kept/dropped split:
//   <y> <= log Z(full) - log Z(kept) <= log<e^y>,
// with <.> the kept-part Gibbs measure and y the dropped-part energy
// (beta included).
struct JensenCertificate {
    double mean_y = 0.0;
    double delta_log_z = 0.0;
    double log_mean_exp_y = 0.0;
    bool pass = false;
};

JensenCertificate jensen_sandwich(const SplitInstance& split);

}  // namespace levyglass

#endif
