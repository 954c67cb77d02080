#ifndef LEVYGLASS_EXPERIMENTS_HPP
#define LEVYGLASS_EXPERIMENTS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "levyglass/model.hpp"
#include "levyglass/report.hpp"
#include "levyglass/rng.hpp"
#include "levyglass/tail_law.hpp"

namespace levyglass {

struct ExperimentConfig {
    double alpha = 1.5;
    double c0 = 0.5;
    double epsilon = 0.1;
    double beta = 1.0;
    double delta = 0.2;  // concentration slack
    int n = 12;
    std::vector<int> n_grid;        // empty -> {8, 12, 16}
    std::size_t samples = 500;
    std::uint64_t base_seed = 0;
    int n1 = 0;                     // 0 -> floor(n/2)
    double burkholder_p = 0.0;      // 0 -> (1 + alpha)/2
    int threads = 1;
    std::vector<long long> r_grid;  // empty -> {0, round(S/2), S}
    std::vector<double> x_grid = {0.1, 0.5, 1.0, 2.0};

    void validate() const;
    TailLaw law() const { return TailLaw(alpha, c0); }
    int block_split(int sites) const { return n1 > 0 ? n1 : sites / 2; }
    double resolved_burkholder_p() const {
        return burkholder_p > 0.0 ? burkholder_p : (1.0 + alpha) / 2.0;
    }
    std::vector<int> resolved_n_grid() const {
        return n_grid.empty() ? std::vector<int>{8, 12, 16} : n_grid;
    }
};

enum class ModelKind { full, truncated, fixed_edge, multi_edge };

const char* model_kind_name(ModelKind kind);

// Disorder-averaged per-spin log partition for one model family at cfg.n.
ExperimentReport quenched_free_energy(const ExperimentConfig& cfg, ModelKind kind);

// All four families across the N-grid, with pairwise difference rows and a
// shrinking-difference trend check per adjacent pair of families.
ExperimentReport reduction_chain(const ExperimentConfig& cfg);

// E log Z(S, N) against the two-block decomposition with binomially split
// edge counts.
ExperimentReport superadditivity_trial(const ExperimentConfig& cfg);

// Monotonicity of E log Z along the interpolating graphs, both statistically
// over the r-grid and via the exact per-step certificate on random bases.
ExperimentReport interpolation_sweep(const ExperimentConfig& cfg);

// Sample variance of log Z across the N-grid against N^(3 - alpha + delta),
// the per-spin self-averaging trend, and the concentration tail frequency.
ExperimentReport concentration_scaling(const ExperimentConfig& cfg);

// Per-coupling deviation bound |log Z - log Z^(x)| <= beta N^(-1/alpha) |J_x|
// checked exactly, plus the p-th power aggregate against its N-scaling.
ExperimentReport coupling_deviation_profile(const ExperimentConfig& cfg);

// Duplicate-count statistics of the multi-edge model and the distinct-edge
// growth process against the geometric/harmonic-sum description.
ExperimentReport multiedge_loop_stats(const ExperimentConfig& cfg);

// Concentration of the surviving-coupling count of the truncated model.
ExperimentReport edge_count_concentration(const ExperimentConfig& cfg);

// Jensen sandwich, exactly per instance and on average over disorder, for the
// truncated split and the block-threshold split.
ExperimentReport jensen_sandwich_audit(const ExperimentConfig& cfg);

// Uniform upper bound on the free energy from the R* = N^(1/alpha) split.
ExperimentReport boundedness_audit(const ExperimentConfig& cfg);

// Checks a_N <= a_N1 + a_(N-N1) + C N^gamma over every admissible split of a
// measured series; reports violations and the a_N / N trend.
ExperimentReport subadditivity_hypothesis_check(const std::map<int, double>& series,
                                                double gamma, double constant);

// Distinct-edge acquisition process of the multigraph: per-step first-passage
// times until k_target distinct non-loop edges are present.
struct GrowthTrace {
    std::vector<long long> distinct_after_step;  // non-decreasing, steps of 0 or 1
    std::vector<long long> passage_times;        // T_i, one per acquired edge
    long long total = 0;                         // T = sum T_i
};

GrowthTrace simulate_growth(int n, long long k_target, RngStream& rng);

// Exact E[T] = A * sum_{i=1}^{k} 1 / (A - n - i + 1), A = n(n+1)/2.
double growth_expected_time(int n, long long k_target);

// Success probability of acquisition step i (1-based).
double growth_step_probability(int n, long long i);

// Run `count` independent tasks on up to `threads` workers; task i writes only
// its own slot, so results are identical for every thread count.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& task);

}  // namespace levyglass

#endif
