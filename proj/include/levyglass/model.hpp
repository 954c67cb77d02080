#ifndef LEVYGLASS_MODEL_HPP
#define LEVYGLASS_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "levyglass/rng.hpp"
#include "levyglass/tail_law.hpp"

namespace levyglass {

// One weighted coupling. Sites are 1-based with i <= j; i == j is a loop.
// Weights are stored raw; the energy scale norm_size^(-1/alpha) is applied
// only when evaluating the Hamiltonian, so one edge list can serve models
// with different normalization bases.
struct Edge {
    int i;
    int j;
    double w;
};

struct ModelInstance {
    int n_sites = 0;
    std::vector<Edge> edges;
    double norm_size = 1.0;  // normalization base m >= 1
    double alpha = 1.5;
    double beta = 1.0;

    double energy_scale() const;                // norm_size^(-1/alpha)
    double scaled_weight(std::size_t a) const;  // edges[a].w * energy_scale()
    void validate() const;
};

// Threshold split: `kept` holds edges whose scaled magnitude reaches the
// threshold, `dropped` the complement. Together they partition the source.
struct SplitInstance {
    ModelInstance kept;
    ModelInstance dropped;
    double threshold = 0.0;
};

// Bookkeeping for one interpolated graph: the first `shared_count` edges of
// the instance were drawn uniformly over all site pairs, the rest by the
// two-step block rule (first a Bernoulli(n1/N) block choice, then a uniform
// pair within the chosen block).
struct InterpolationState {
    int n1 = 0;
    int n2 = 0;
    long long r = 0;
    long long shared_count = 0;
    std::vector<std::uint8_t> block_of_edge;  // 0 = shared, 1 = block A, 2 = block B
};

struct InterpolatedModel {
    ModelInstance instance;
    InterpolationState state;
};

// Complete-graph instance: one i.i.d. coupling per pair i < j, norm_size n.
ModelInstance build_full(int n, const TailLaw& law, double beta, RngStream& rng);

// Partition by scaled magnitude |w| * norm_size^(-1/alpha) >= threshold.
SplitInstance split_by_threshold(const ModelInstance& inst, double threshold);

// Merge a split back together (kept edges first). Recombination restores the
// source instance up to edge order.
ModelInstance recombine(const SplitInstance& split);

// Sparse edge budget floor((c0/2) n^(1 + alpha * epsilon)).
long long s_n(int n, double alpha, double epsilon, double c0);

// Exactly s distinct non-loop edges, uniform over s-subsets, weights
// conditioned above n^(1/alpha - epsilon).
ModelInstance build_fixed_edge(int n, long long s, const TailLaw& law, double epsilon,
                               double beta, RngStream& rng);

// u edges sampled with replacement from {(i,j) : 1 <= i <= j <= v}, weights
// conditioned above m^(1/alpha - epsilon), energy scale m^(-1/alpha).
ModelInstance build_multiedge(long long u, int v, double m, const TailLaw& law,
                              double epsilon, double beta, RngStream& rng);

// Number of loops plus surplus multiplicity over distinct non-loop pairs.
long long duplicate_count(const ModelInstance& inst);

// Interpolating graph between the size-n multi-edge model (r = S) and a
// disjoint union of two block models (r = 0).
InterpolatedModel build_interpolated(int n, int n1, long long r, const TailLaw& law,
                                     double epsilon, double beta, RngStream& rng);

// Copy of the instance with the edge at `index` removed.
ModelInstance drop_edge(const ModelInstance& inst, std::size_t index);

// Adjust a distinct-edge instance to exactly `target` edges: deletions pick
// uniformly among present edges, additions pick uniformly among absent pairs
// and draw fresh conditioned weights. Exactly |current - target| edges change.
ModelInstance rewire_to_count(const ModelInstance& inst, long long target,
                              const TailLaw& law, double epsilon, RngStream& rng);

struct SpinConfig;  // exact.hpp

// norm_size^(-1/alpha) * sum_a w_a * sigma_i(a) * sigma_j(a); loops add w_a.
double hamiltonian(const ModelInstance& inst, const SpinConfig& sigma);

// Instance file format: header "levyglass-instance v1 n=<N> m=<m> alpha=<a>
// beta=<b>", then one "i j w" line per edge, numbers as shortest round-trip
// decimals.
void write_instance(const ModelInstance& inst, std::ostream& out);
ModelInstance read_instance(std::istream& in);

}  // namespace levyglass

#endif
