#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "levyglass/errors.hpp"
#include "levyglass/exact.hpp"
#include "levyglass/model.hpp"
#include "levyglass/stats.hpp"

using namespace levyglass;

namespace {

bool same_edges(const ModelInstance& a, const ModelInstance& b) {
    if (a.edges.size() != b.edges.size()) return false;
    for (std::size_t k = 0; k < a.edges.size(); ++k)
        if (a.edges[k].i != b.edges[k].i || a.edges[k].j != b.edges[k].j ||
            a.edges[k].w != b.edges[k].w)
            return false;
    return true;
}

std::multiset<std::pair<int, int>> pair_multiset(const ModelInstance& inst) {
    std::multiset<std::pair<int, int>> out;
    for (const Edge& e : inst.edges) out.insert({e.i, e.j});
    return out;
}

}  // namespace

TEST_CASE("build_full basic structure and determinism") {
    TailLaw law(1.5, 0.5);
    RngStream rng(1);
    CHECK(build_full(1, law, 1.0, rng).edges.empty());

    RngStream rng4(2);
    ModelInstance inst = build_full(4, law, 1.0, rng4);
    CHECK(inst.edges.size() == 6);
    std::set<std::pair<int, int>> pairs;
    for (const Edge& e : inst.edges) {
        CHECK(e.i < e.j);
        pairs.insert({e.i, e.j});
    }
    CHECK(pairs.size() == 6);
    CHECK(inst.norm_size == 4.0);

    RngStream a(42), b(42);
    CHECK(same_edges(build_full(3, law, 1.0, a), build_full(3, law, 1.0, b)));
    RngStream bad(1);
    CHECK_THROWS_AS(build_full(0, law, 1.0, bad), std::invalid_argument);
}

TEST_CASE("split_by_threshold partitions and recombines") {
    TailLaw law(1.5, 0.5);
    ModelInstance inst;
    inst.n_sites = 3;
    inst.norm_size = 1.0;  // scaled weight == raw weight
    inst.alpha = law.alpha;
    inst.beta = 1.0;
    inst.edges = {{1, 2, 0.3}, {1, 3, 0.9}};

    SplitInstance cut = split_by_threshold(inst, 0.5);
    CHECK(cut.kept.edges.size() == 1);
    CHECK(cut.dropped.edges.size() == 1);
    CHECK(cut.kept.edges[0].w == 0.9);

    SplitInstance everything = split_by_threshold(inst, 0.0);
    CHECK(everything.kept.edges.size() == 2);
    CHECK(everything.dropped.edges.empty());

    SplitInstance nothing =
        split_by_threshold(inst, std::numeric_limits<double>::infinity());
    CHECK(nothing.kept.edges.empty());
    CHECK(nothing.dropped.edges.size() == 2);

    CHECK(pair_multiset(recombine(cut)) == pair_multiset(inst));
}

TEST_CASE("split respects the scaled magnitude") {
    TailLaw law(1.5, 0.5);
    RngStream rng(7);
    ModelInstance inst = build_full(8, law, 1.0, rng);
    double thr = 0.4;
    SplitInstance cut = split_by_threshold(inst, thr);
    double scale = inst.energy_scale();
    for (const Edge& e : cut.kept.edges) CHECK(std::fabs(e.w) * scale >= thr);
    for (const Edge& e : cut.dropped.edges) CHECK(std::fabs(e.w) * scale < thr);
}

TEST_CASE("s_n closed form") {
    CHECK(s_n(100, 1.5, 0.1, 1.0) == 99);
    CHECK(s_n(1, 1.5, 0.1, 1.0) == 0);
    CHECK(s_n(100, 1.5, 0.0, 1.0) == 50);
}

TEST_CASE("build_fixed_edge structure, supports and errors") {
    TailLaw law(1.5, 1.0);
    RngStream rng(9);
    CHECK(build_fixed_edge(5, 0, law, 0.1, 1.0, rng).edges.empty());

    ModelInstance complete = build_fixed_edge(5, 10, law, 0.1, 1.0, rng);
    CHECK(complete.edges.size() == 10);

    ModelInstance inst = build_fixed_edge(5, 3, law, 0.1, 1.0, rng);
    CHECK(inst.edges.size() == 3);
    std::set<std::pair<int, int>> seen;
    double r = std::pow(5.0, 1.0 / 1.5 - 0.1);
    for (const Edge& e : inst.edges) {
        CHECK(e.i < e.j);
        CHECK(seen.insert({e.i, e.j}).second);
        CHECK(std::fabs(e.w) >= r);
    }
    CHECK_THROWS_AS(build_fixed_edge(5, 11, law, 0.1, 1.0, rng), std::invalid_argument);
}

TEST_CASE("build_multiedge structure and pair uniformity") {
    TailLaw law(1.5, 1.0);
    RngStream rng(11);
    CHECK(build_multiedge(0, 4, 4.0, law, 0.1, 1.0, rng).edges.empty());

    ModelInstance loops = build_multiedge(20, 1, 1.0, law, 0.1, 1.0, rng);
    for (const Edge& e : loops.edges) {
        CHECK(e.i == 1);
        CHECK(e.j == 1);
    }

    const long long u = 110000;
    ModelInstance big = build_multiedge(u, 10, 10.0, law, 0.1, 1.0, rng);
    std::map<std::pair<int, int>, long long> counts;
    for (const Edge& e : big.edges) ++counts[{e.i, e.j}];
    double p = 1.0 / 55.0;
    double se = std::sqrt(p * (1.0 - p) * u);
    for (int i = 1; i <= 10; ++i)
        for (int j = i; j <= 10; ++j)
            CHECK(std::fabs(counts[{i, j}] - u * p) < 4.0 * se);
}

TEST_CASE("duplicate_count hand examples") {
    ModelInstance inst;
    inst.n_sites = 3;
    inst.edges = {{1, 1, 0.5}, {1, 2, 1.0}, {1, 2, -2.0}, {2, 3, 0.1}};
    CHECK(duplicate_count(inst) == 2);

    inst.edges.clear();
    CHECK(duplicate_count(inst) == 0);

    inst.edges = {{1, 2, 1.0}, {2, 3, 1.0}, {1, 3, 1.0}};
    CHECK(duplicate_count(inst) == 0);
}

TEST_CASE("build_interpolated boundary and block structure") {
    TailLaw law(1.5, 1.0);
    long long s = s_n(6, 1.5, 0.1, 1.0);
    REQUIRE(s >= 3);

    RngStream rng(13);
    InterpolatedModel top = build_interpolated(6, 3, s, law, 0.1, 1.0, rng);
    CHECK(top.state.shared_count == s);
    for (std::uint8_t tag : top.state.block_of_edge) CHECK(tag == 0);

    InterpolatedModel bottom = build_interpolated(6, 3, 0, law, 0.1, 1.0, rng);
    for (std::size_t k = 0; k < bottom.instance.edges.size(); ++k) {
        const Edge& e = bottom.instance.edges[k];
        bool in_a = e.i <= 3 && e.j <= 3;
        bool in_b = e.i >= 4 && e.j >= 4;
        CHECK((in_a || in_b));
        CHECK(bottom.state.block_of_edge[k] == (in_a ? 1 : 2));
    }

    InterpolatedModel mid = build_interpolated(6, 3, 2, law, 0.1, 1.0, rng);
    CHECK(mid.instance.edges.size() == static_cast<std::size_t>(s));
    for (std::size_t k = 2; k < mid.instance.edges.size(); ++k) {
        const Edge& e = mid.instance.edges[k];
        CHECK(((e.i <= 3 && e.j <= 3) || (e.i >= 4 && e.j >= 4)));
    }

    CHECK_THROWS_AS(build_interpolated(6, 6, 0, law, 0.1, 1.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(build_interpolated(6, 3, s + 1, law, 0.1, 1.0, rng), std::invalid_argument);
}

TEST_CASE("interpolated at r = S matches the multi-edge law (chi-square at 1%)") {
    TailLaw law(1.5, 1.0);
    const int n = 6;
    long long s = s_n(n, 1.5, 0.1, 1.0);
    std::map<std::pair<int, int>, double> count_a, count_b;
    RngStream rng_a(21), rng_b(22);
    const int reps = 4000;
    for (int rep = 0; rep < reps; ++rep) {
        for (const Edge& e :
             build_interpolated(n, 3, s, law, 0.1, 1.0, rng_a).instance.edges)
            count_a[{e.i, e.j}] += 1.0;
        for (const Edge& e :
             build_multiedge(s, n, n, law, 0.1, 1.0, rng_b).edges)
            count_b[{e.i, e.j}] += 1.0;
    }
    // two-sample homogeneity over the 21 pair cells
    std::vector<double> observed, expected;
    double total_a = s * static_cast<double>(reps), total_b = total_a;
    for (int i = 1; i <= n; ++i) {
        for (int j = i; j <= n; ++j) {
            double a = count_a[{i, j}], b = count_b[{i, j}];
            observed.push_back(a);
            expected.push_back((a + b) * total_a / (total_a + total_b));
        }
    }
    ChiSquareResult r = chi_square_gof(observed, expected);
    CHECK(r.p_value > 0.01);
}

TEST_CASE("multi-edge sample conditioned on no duplicates matches uniform subsets") {
    // the distributional bridge behind the fixed-edge coupling
    TailLaw law(1.5, 1.0);
    const int n = 6;
    long long s = s_n(n, 1.5, 0.1, 1.0);
    RngStream rng(23);
    std::map<std::pair<int, int>, double> inclusion;
    long long kept_samples = 0;
    for (int rep = 0; rep < 20000; ++rep) {
        ModelInstance inst = build_multiedge(s, n, n, law, 0.1, 1.0, rng);
        if (duplicate_count(inst) != 0) continue;
        ++kept_samples;
        for (const Edge& e : inst.edges) inclusion[{e.i, e.j}] += 1.0;
    }
    REQUIRE(kept_samples > 2000);
    double p = static_cast<double>(s) / 15.0;  // uniform s-subset inclusion
    double se = std::sqrt(p * (1.0 - p) / static_cast<double>(kept_samples));
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            CHECK(std::fabs(inclusion[{i, j}] / kept_samples - p) < 4.0 * se);
}

TEST_CASE("drop_edge removes exactly one edge") {
    ModelInstance inst;
    inst.n_sites = 3;
    inst.edges = {{1, 2, 1.0}};
    ModelInstance empty = drop_edge(inst, 0);
    CHECK(empty.edges.empty());

    inst.edges = {{1, 2, 1.0}, {2, 3, -0.5}, {1, 3, 2.0}};
    ModelInstance smaller = drop_edge(inst, 1);
    CHECK(smaller.edges.size() == 2);
    ModelInstance back = smaller;
    back.edges.push_back({2, 3, -0.5});
    CHECK(pair_multiset(back) == pair_multiset(inst));

    CHECK_THROWS_AS(drop_edge(inst, 3), std::invalid_argument);
}

TEST_CASE("rewire_to_count hits the target with minimal changes") {
    TailLaw law(1.5, 1.0);
    RngStream rng(17);
    ModelInstance inst = build_fixed_edge(5, 4, law, 0.1, 1.0, rng);

    ModelInstance same = rewire_to_count(inst, 4, law, 0.1, rng);
    CHECK(same_edges(inst, same));

    ModelInstance none = rewire_to_count(inst, 0, law, 0.1, rng);
    CHECK(none.edges.empty());

    ModelInstance grown = rewire_to_count(inst, 6, law, 0.1, rng);
    CHECK(grown.edges.size() == 6);
    std::set<std::pair<int, int>> pairs;
    for (const Edge& e : grown.edges) CHECK(pairs.insert({e.i, e.j}).second);
    // original edges untouched
    for (std::size_t k = 0; k < inst.edges.size(); ++k)
        CHECK(grown.edges[k].w == inst.edges[k].w);

    ModelInstance shrunk = rewire_to_count(inst, 2, law, 0.1, rng);
    CHECK(shrunk.edges.size() == 2);
    auto original = pair_multiset(inst);
    for (const Edge& e : shrunk.edges) CHECK(original.count({e.i, e.j}) == 1);

    CHECK_THROWS_AS(rewire_to_count(inst, 11, law, 0.1, rng), std::invalid_argument);
    ModelInstance looped = inst;
    looped.edges.push_back({2, 2, 1.0});
    CHECK_THROWS_AS(rewire_to_count(looped, 3, law, 0.1, rng), std::invalid_argument);
}

TEST_CASE("rewire preserves pair exchangeability") {
    TailLaw law(1.5, 1.0);
    RngStream rng(29);
    std::map<std::pair<int, int>, double> inclusion;
    const int reps = 20000;
    for (int rep = 0; rep < reps; ++rep) {
        ModelInstance inst = build_fixed_edge(5, 4, law, 0.1, 1.0, rng);
        ModelInstance grown = rewire_to_count(inst, 6, law, 0.1, rng);
        for (const Edge& e : grown.edges) inclusion[{e.i, e.j}] += 1.0;
    }
    double p = 0.6;  // 6 of 10 pairs present
    double se = std::sqrt(p * (1.0 - p) / reps);
    for (int i = 1; i <= 5; ++i)
        for (int j = i + 1; j <= 5; ++j)
            CHECK(std::fabs(inclusion[{i, j}] / reps - p) < 4.0 * se);
}

TEST_CASE("hamiltonian values and global flip symmetry") {
    ModelInstance inst;
    inst.n_sites = 2;
    inst.alpha = 1.5;
    inst.norm_size = 2.0;
    inst.beta = 1.0;
    inst.edges = {{1, 2, 0.7}};
    double scale = std::pow(2.0, -1.0 / 1.5);

    SpinConfig plus{2, 0b11};
    CHECK(hamiltonian(inst, plus) == doctest::Approx(0.7 * scale));
    SpinConfig mixed{2, 0b01};
    CHECK(hamiltonian(inst, mixed) == doctest::Approx(-0.7 * scale));

    // flip symmetry with loops included
    ModelInstance loopy;
    loopy.n_sites = 3;
    loopy.alpha = 1.4;
    loopy.norm_size = 3.0;
    loopy.beta = 1.0;
    loopy.edges = {{1, 2, 1.3}, {2, 2, -0.4}, {1, 3, 0.2}};
    for (std::uint32_t bits = 0; bits < 8; ++bits) {
        SpinConfig sigma{3, bits};
        SpinConfig flipped{3, static_cast<std::uint32_t>(~bits) & 0x7u};
        CHECK(hamiltonian(loopy, sigma) == doctest::Approx(hamiltonian(loopy, flipped)));
    }

    SpinConfig wrong{3, 0};
    CHECK_THROWS_AS(hamiltonian(inst, wrong), std::invalid_argument);
}

TEST_CASE("instance serialization round-trips bit-exactly") {
    TailLaw law(1.5, 0.5);
    RngStream rng(123);
    ModelInstance inst = build_full(5, law, 0.75, rng);
    inst.edges.push_back({2, 2, 0.1234567890123456789});

    std::stringstream buffer;
    write_instance(inst, buffer);
    std::string text = buffer.str();
    CHECK(text.rfind("levyglass-instance v1 n=5 m=5 alpha=1.5 beta=0.75\n", 0) == 0);

    ModelInstance parsed = read_instance(buffer);
    CHECK(parsed.n_sites == inst.n_sites);
    CHECK(parsed.norm_size == inst.norm_size);
    CHECK(parsed.alpha == inst.alpha);
    CHECK(parsed.beta == inst.beta);
    CHECK(same_edges(parsed, inst));

    std::stringstream bad("not-an-instance v1 n=2 m=2 alpha=1.5 beta=1\n");
    CHECK_THROWS(read_instance(bad));
}
