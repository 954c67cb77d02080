#include "levyglass/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>

#include "levyglass/errors.hpp"
#include "levyglass/exact.hpp"

namespace levyglass {

double ModelInstance::energy_scale() const { return std::pow(norm_size, -1.0 / alpha); }

double ModelInstance::scaled_weight(std::size_t a) const {
    return edges[a].w * energy_scale();
}

void ModelInstance::validate() const {
    if (n_sites < 1) throw std::invalid_argument("ModelInstance: n_sites must be >= 1");
    if (!(norm_size >= 1.0)) throw std::invalid_argument("ModelInstance: norm_size must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("ModelInstance: beta must be > 0");
    for (const Edge& e : edges) {
        if (e.i < 1 || e.j < e.i || e.j > n_sites)
            throw std::invalid_argument("ModelInstance: edge index out of range");
        if (!std::isfinite(e.w))
            throw std::invalid_argument("ModelInstance: non-finite weight");
    }
}

ModelInstance build_full(int n, const TailLaw& law, double beta, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("build_full: n must be >= 1");
    ModelInstance inst;
    inst.n_sites = n;
    inst.norm_size = static_cast<double>(n);
    inst.alpha = law.alpha;
    inst.beta = beta;
    inst.edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            inst.edges.push_back({i, j, sample(law, rng)});
    return inst;
}

SplitInstance split_by_threshold(const ModelInstance& inst, double threshold) {
    if (threshold < 0.0 || std::isnan(threshold))
        throw std::invalid_argument("split_by_threshold: threshold must be >= 0");
    SplitInstance out;
    out.threshold = threshold;
    out.kept = out.dropped = inst;
    out.kept.edges.clear();
    out.dropped.edges.clear();
    double scale = inst.energy_scale();
    for (const Edge& e : inst.edges)
        (std::fabs(e.w) * scale >= threshold ? out.kept : out.dropped).edges.push_back(e);
    return out;
}

ModelInstance recombine(const SplitInstance& split) {
    ModelInstance out = split.kept;
    out.edges.insert(out.edges.end(), split.dropped.edges.begin(), split.dropped.edges.end());
    return out;
}

long long s_n(int n, double alpha, double epsilon, double c0) {
    if (n < 1) throw std::invalid_argument("s_n: n must be >= 1");
    if (epsilon < 0.0) throw std::invalid_argument("s_n: epsilon must be >= 0");
    return static_cast<long long>(
        std::floor(c0 / 2.0 * std::pow(static_cast<double>(n), 1.0 + alpha * epsilon)));
}

namespace {

// Uniform pair with 1 <= i <= j <= v (loops allowed); index decode over the
// triangular enumeration is avoided in favor of row-first draw with exact
// probabilities via a single bounded integer.
std::pair<int, int> uniform_pair_with_loops(int lo, int hi, RngStream& rng) {
    int v = hi - lo + 1;
    auto count = static_cast<std::uint64_t>(v) * (v + 1) / 2;
    std::uint64_t k = rng.below(count);
    // Decode k into (i, j) with i <= j over rows of shrinking length.
    int i = 0;
    std::uint64_t row_len = static_cast<std::uint64_t>(v);
    while (k >= row_len) {
        k -= row_len;
        --row_len;
        ++i;
    }
    int j = i + static_cast<int>(k);
    return {lo + i, lo + j};
}

std::pair<int, int> uniform_distinct_pair(int n, RngStream& rng) {
    auto count = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::uint64_t k = rng.below(count);
    int i = 0;
    std::uint64_t row_len = static_cast<std::uint64_t>(n - 1);
    while (k >= row_len) {
        k -= row_len;
        --row_len;
        ++i;
    }
    int j = i + 1 + static_cast<int>(k);
    return {1 + i, 1 + j};
}

std::uint64_t pair_key(int i, int j, int n) {
    return static_cast<std::uint64_t>(i - 1) * static_cast<std::uint64_t>(n) +
           static_cast<std::uint64_t>(j - 1);
}

}  // namespace

ModelInstance build_fixed_edge(int n, long long s, const TailLaw& law, double epsilon,
                               double beta, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("build_fixed_edge: n must be >= 1");
    long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
    if (s < 0 || s > max_edges)
        throw std::invalid_argument("build_fixed_edge: edge count out of range");

    ModelInstance inst;
    inst.n_sites = n;
    inst.norm_size = static_cast<double>(n);
    inst.alpha = law.alpha;
    inst.beta = beta;
    ConditionedSpec cond = ConditionedSpec::rescaled(static_cast<double>(n), epsilon, law.alpha);

    // Rejection against a presence set; s << n^2/2 in every regime of
    // interest, so expected rejections are negligible and uniformity is exact.
    std::unordered_set<std::uint64_t> present;
    present.reserve(static_cast<std::size_t>(s) * 2 + 1);
    while (static_cast<long long>(inst.edges.size()) < s) {
        auto [i, j] = uniform_distinct_pair(n, rng);
        if (!present.insert(pair_key(i, j, n)).second) continue;
        inst.edges.push_back({i, j, sample_conditioned(law, cond, rng)});
    }
    return inst;
}

ModelInstance build_multiedge(long long u, int v, double m, const TailLaw& law,
                              double epsilon, double beta, RngStream& rng) {
    if (u < 0) throw std::invalid_argument("build_multiedge: u must be >= 0");
    if (v < 1) throw std::invalid_argument("build_multiedge: v must be >= 1");
    ModelInstance inst;
    inst.n_sites = v;
    inst.norm_size = m;
    inst.alpha = law.alpha;
    inst.beta = beta;
    ConditionedSpec cond = ConditionedSpec::rescaled(m, epsilon, law.alpha);
    inst.edges.reserve(static_cast<std::size_t>(u));
    for (long long a = 0; a < u; ++a) {
        auto [i, j] = uniform_pair_with_loops(1, v, rng);
        inst.edges.push_back({i, j, sample_conditioned(law, cond, rng)});
    }
    return inst;
}

long long duplicate_count(const ModelInstance& inst) {
    long long loops = 0;
    std::map<std::pair<int, int>, long long> mult;
    for (const Edge& e : inst.edges) {
        if (e.i == e.j)
            ++loops;
        else
            ++mult[{e.i, e.j}];
    }
    long long dups = 0;
    for (const auto& [pair, count] : mult)
        if (count > 1) dups += count - 1;
    return loops + dups;
}

InterpolatedModel build_interpolated(int n, int n1, long long r, const TailLaw& law,
                                     double epsilon, double beta, RngStream& rng) {
    if (n < 2 || n1 < 1 || n1 > n - 1)
        throw std::invalid_argument("build_interpolated: need 1 <= n1 <= n-1");
    long long total = s_n(n, law.alpha, epsilon, law.c0);
    if (r < 0 || r > total)
        throw std::invalid_argument("build_interpolated: r out of [0, S]");

    InterpolatedModel out;
    out.instance.n_sites = n;
    out.instance.norm_size = static_cast<double>(n);
    out.instance.alpha = law.alpha;
    out.instance.beta = beta;
    out.state.n1 = n1;
    out.state.n2 = n - n1;
    out.state.r = r;
    out.state.shared_count = r;
    ConditionedSpec cond = ConditionedSpec::rescaled(static_cast<double>(n), epsilon, law.alpha);

    double block_a_prob = static_cast<double>(n1) / static_cast<double>(n);
    for (long long a = 0; a < total; ++a) {
        int i, j;
        std::uint8_t tag;
        if (a < r) {
            std::tie(i, j) = uniform_pair_with_loops(1, n, rng);
            tag = 0;
        } else if (rng.bernoulli(block_a_prob)) {
            std::tie(i, j) = uniform_pair_with_loops(1, n1, rng);
            tag = 1;
        } else {
            std::tie(i, j) = uniform_pair_with_loops(n1 + 1, n, rng);
            tag = 2;
        }
        out.instance.edges.push_back({i, j, sample_conditioned(law, cond, rng)});
        out.state.block_of_edge.push_back(tag);
    }
    return out;
}

ModelInstance drop_edge(const ModelInstance& inst, std::size_t index) {
    if (index >= inst.edges.size())
        throw std::invalid_argument("drop_edge: index out of range");
    ModelInstance out = inst;
    out.edges.erase(out.edges.begin() + static_cast<std::ptrdiff_t>(index));
    return out;
}

ModelInstance rewire_to_count(const ModelInstance& inst, long long target,
                              const TailLaw& law, double epsilon, RngStream& rng) {
    int n = inst.n_sites;
    long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
    if (target < 0 || target > max_edges)
        throw std::invalid_argument("rewire_to_count: target out of range");

    std::unordered_set<std::uint64_t> present;
    for (const Edge& e : inst.edges) {
        if (e.i == e.j || !present.insert(pair_key(e.i, e.j, n)).second)
            throw std::invalid_argument(
                "rewire_to_count: instance must have distinct non-loop edges");
    }

    ModelInstance out = inst;
    long long current = static_cast<long long>(out.edges.size());
    if (current > target) {
        for (long long k = current; k > target; --k) {
            std::size_t victim = static_cast<std::size_t>(rng.below(out.edges.size()));
            out.edges.erase(out.edges.begin() + static_cast<std::ptrdiff_t>(victim));
        }
    } else if (current < target) {
        ConditionedSpec cond =
            ConditionedSpec::rescaled(inst.norm_size, epsilon, law.alpha);
        while (static_cast<long long>(out.edges.size()) < target) {
            auto [i, j] = uniform_distinct_pair(n, rng);
            if (!present.insert(pair_key(i, j, n)).second) continue;
            out.edges.push_back({i, j, sample_conditioned(law, cond, rng)});
        }
    }
    return out;
}

double hamiltonian(const ModelInstance& inst, const SpinConfig& sigma) {
    if (sigma.n != inst.n_sites)
        throw std::invalid_argument("hamiltonian: spin count does not match n_sites");
    double acc = 0.0;
    for (const Edge& e : inst.edges)
        acc += e.w * sigma.spin(e.i) * sigma.spin(e.j);
    return acc * inst.energy_scale();
}

namespace {

std::string shortest_decimal(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw std::runtime_error("shortest_decimal: to_chars failed");
    return std::string(buf, ptr);
}

double parse_double(std::string_view s, const char* what) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error(std::string("read_instance: bad ") + what);
    return x;
}

std::string_view field_after(std::string_view token, std::string_view key) {
    if (token.substr(0, key.size()) != key)
        throw std::runtime_error("read_instance: malformed header field, expected " +
                                 std::string(key));
    return token.substr(key.size());
}

}  // namespace

void write_instance(const ModelInstance& inst, std::ostream& out) {
    out << "levyglass-instance v1 n=" << inst.n_sites << " m=" << shortest_decimal(inst.norm_size)
        << " alpha=" << shortest_decimal(inst.alpha) << " beta=" << shortest_decimal(inst.beta)
        << "\n";
    for (const Edge& e : inst.edges)
        out << e.i << " " << e.j << " " << shortest_decimal(e.w) << "\n";
}

ModelInstance read_instance(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("read_instance: empty stream");
    std::istringstream hs(header);
    std::string magic, version, nf, mf, af, bf;
    hs >> magic >> version >> nf >> mf >> af >> bf;
    if (magic != "levyglass-instance" || version != "v1")
        throw std::runtime_error("read_instance: not a levyglass-instance v1 file");
    ModelInstance inst;
    inst.n_sites = static_cast<int>(parse_double(field_after(nf, "n="), "n"));
    inst.norm_size = parse_double(field_after(mf, "m="), "m");
    inst.alpha = parse_double(field_after(af, "alpha="), "alpha");
    inst.beta = parse_double(field_after(bf, "beta="), "beta");

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Edge e{};
        std::string ws;
        if (!(ls >> e.i >> e.j >> ws))
            throw std::runtime_error("read_instance: malformed edge line: " + line);
        e.w = parse_double(ws, "weight");
        inst.edges.push_back(e);
    }
    inst.validate();
    return inst;
}

}  // namespace levyglass
