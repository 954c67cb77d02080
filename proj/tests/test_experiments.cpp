#include <doctest.h>

#include <cmath>
#include <map>

#include "levyglass/errors.hpp"
#include "levyglass/exact.hpp"
#include "levyglass/experiments.hpp"
#include "levyglass/stats.hpp"

using namespace levyglass;

namespace {

const ReportRow& row(const ExperimentReport& report, const std::string& quantity) {
    for (const ReportRow& r : report.rows)
        if (r.quantity == quantity) return r;
    REQUIRE_MESSAGE(false, "missing row: " << quantity);
    static ReportRow dummy;
    return dummy;
}

const ReportRow& row_at(const ExperimentReport& report, const std::string& quantity, int n) {
    for (const ReportRow& r : report.rows)
        if (r.quantity == quantity && r.n == n) return r;
    REQUIRE_MESSAGE(false, "missing row: " << quantity << " at N=" << n);
    static ReportRow dummy;
    return dummy;
}

}  // namespace

TEST_CASE("config validation windows") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.samples = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.samples = 10;
    cfg.epsilon = 0.3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.epsilon = 0.1;
    cfg.burkholder_p = 1.7;  // >= alpha
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.burkholder_p = 0.0;
    CHECK(cfg.resolved_burkholder_p() == doctest::Approx(1.25));
    CHECK(cfg.block_split(10) == 5);
}

TEST_CASE("quenched free energy approaches log 2 as beta -> 0") {
    ExperimentConfig cfg;
    cfg.n = 8;
    cfg.samples = 40;
    cfg.beta = 1e-9;
    cfg.base_seed = 3;
    ExperimentReport report = quenched_free_energy(cfg, ModelKind::full);
    const ReportRow& f = row(report, "F_full");
    CHECK(std::fabs(f.estimate - std::log(2.0)) < 1e-6);
    CHECK(f.stderr_ < 1e-6);
}

TEST_CASE("quenched free energy reproduces the two-site closed form per replica") {
    ExperimentConfig cfg;
    cfg.n = 2;
    cfg.samples = 2;
    cfg.beta = 0.8;
    cfg.base_seed = 17;
    ExperimentReport report = quenched_free_energy(cfg, ModelKind::full);

    // rebuild the replica streams the experiment contract prescribes
    TailLaw law = cfg.law();
    double expected = 0.0;
    for (std::uint64_t i = 0; i < 2; ++i) {
        RngStream rng(derive_seed(cfg.base_seed, "free-energy/full", i));
        ModelInstance inst = build_full(2, law, cfg.beta, rng);
        double scaled = inst.scaled_weight(0);
        expected += 0.5 * std::log(4.0 * std::cosh(cfg.beta * scaled));
    }
    expected /= 2.0;
    CHECK(row(report, "F_full").estimate == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("experiments are deterministic and thread-count independent") {
    ExperimentConfig cfg;
    cfg.n = 8;
    cfg.samples = 60;
    cfg.base_seed = 5;
    cfg.threads = 1;
    ExperimentReport serial = jensen_sandwich_audit(cfg);
    ExperimentReport again = jensen_sandwich_audit(cfg);
    CHECK(same_results(serial, again));
    cfg.threads = 4;
    ExperimentReport parallel = jensen_sandwich_audit(cfg);
    CHECK(same_results(serial, parallel));

    cfg.base_seed = 6;
    CHECK(!same_results(serial, jensen_sandwich_audit(cfg)));

    ExperimentConfig fe;
    fe.n = 6;
    fe.samples = 40;
    fe.base_seed = 9;
    CHECK(same_results(quenched_free_energy(fe, ModelKind::full),
                       quenched_free_energy(fe, ModelKind::full)));
}

TEST_CASE("every report row satisfies pass == (margin >= 0)") {
    ExperimentConfig cfg;
    cfg.n = 8;
    cfg.c0 = 1.0;
    cfg.samples = 50;
    cfg.base_seed = 15;
    cfg.threads = 4;
    cfg.n_grid = {6, 8, 10};
    cfg.samples = 200;
    for (const ExperimentReport& report :
         {superadditivity_trial(cfg), jensen_sandwich_audit(cfg), boundedness_audit(cfg),
          concentration_scaling(cfg), coupling_deviation_profile(cfg)}) {
        for (const ReportRow& r : report.rows) CHECK(r.pass == (r.margin >= 0.0));
    }
}

TEST_CASE("reduction chain: near-zero tail constant gives log 2") {
    ExperimentConfig cfg;
    cfg.c0 = 0.01;
    cfg.n_grid = {6, 8};
    cfg.samples = 80;
    cfg.base_seed = 11;
    ExperimentReport report = reduction_chain(cfg);
    // S_N = 0 at this c0, so the fixed- and multi-edge families are exactly
    // free; the full model keeps its sub-unit body and the truncated model
    // the rare surviving tail coupling, so those sit a hair above log 2
    for (int n : cfg.n_grid) {
        REQUIRE(s_n(n, cfg.alpha, cfg.epsilon, cfg.c0) == 0);
        for (const char* name : {"F_fixed_edge", "F_multi_edge"}) {
            const ReportRow& r = row_at(report, name, n);
            CHECK(r.estimate == doctest::Approx(std::log(2.0)).epsilon(1e-12));
            CHECK(r.stderr_ == doctest::Approx(0.0));
        }
        for (const char* name : {"F_full", "F_truncated"}) {
            const ReportRow& r = row_at(report, name, n);
            CHECK(r.estimate >= std::log(2.0) - 2.0 * r.stderr_ - 1e-12);
            CHECK(r.estimate < std::log(2.0) + 0.1);
        }
    }
    // trend rows exist for the three adjacent pairs
    row(report, "trend_full_truncated");
    row(report, "trend_truncated_fixed_edge");
    row(report, "trend_fixed_edge_multi_edge");
}

TEST_CASE("superadditivity: degenerate edge budget gives exact equality") {
    ExperimentConfig cfg;
    cfg.n = 3;
    cfg.c0 = 0.1;  // S_3 = 0
    cfg.n1 = 1;
    cfg.samples = 10;
    cfg.base_seed = 2;
    REQUIRE(s_n(cfg.n, cfg.alpha, cfg.epsilon, cfg.c0) == 0);
    ExperimentReport report = superadditivity_trial(cfg);
    CHECK(row(report, "lhs").estimate == doctest::Approx(3.0 * std::log(2.0)));
    CHECK(row(report, "rhs").estimate == doctest::Approx(3.0 * std::log(2.0)));
    CHECK(row(report, "superadditivity").pass);
}

TEST_CASE("superadditivity holds at the block-window edge") {
    ExperimentConfig cfg;
    cfg.n = 9;
    cfg.n1 = 3;
    cfg.c0 = 1.0;
    cfg.samples = 400;
    cfg.base_seed = 4;
    cfg.threads = 4;
    ExperimentReport report = superadditivity_trial(cfg);
    CHECK(row(report, "superadditivity").pass);

    cfg.n1 = 2;  // outside [n/3, 2n/3]
    CHECK_THROWS_AS(superadditivity_trial(cfg), std::invalid_argument);
}

TEST_CASE("superadditivity pass is stable across seeds") {
    int passes = 0;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        ExperimentConfig cfg;
        cfg.n = 9;
        cfg.c0 = 1.0;
        cfg.samples = 300;
        cfg.base_seed = seed;
        cfg.threads = 4;
        if (row(superadditivity_trial(cfg), "superadditivity").pass) ++passes;
    }
    CHECK(passes >= 2);
}

TEST_CASE("interpolation sweep monotone within allowance and certificates clean") {
    ExperimentConfig cfg;
    cfg.n = 8;
    cfg.c0 = 1.0;
    cfg.samples = 200;
    cfg.base_seed = 7;
    cfg.threads = 4;
    ExperimentReport report = interpolation_sweep(cfg);
    CHECK(row(report, "certificate_violations").estimate == 0.0);
    CHECK(row(report, "certificate_min_gap").estimate >= -1e-9);
    for (const ReportRow& r : report.rows)
        if (r.quantity.rfind("monotone_", 0) == 0) CHECK(r.pass);
}

TEST_CASE("concentration scaling control and comparator value") {
    ExperimentConfig cfg;
    cfg.c0 = 0.01;
    cfg.n_grid = {6, 8, 10};
    cfg.samples = 200;
    cfg.base_seed = 13;
    cfg.threads = 4;
    ExperimentReport report = concentration_scaling(cfg);
    for (int n : cfg.n_grid) {
        const ReportRow& var = row_at(report, "var_logZ", n);
        CHECK(var.comparator ==
              doctest::Approx(std::pow(static_cast<double>(n), 1.7)).epsilon(1e-12));
        CHECK(var.pass);  // near-free system: tiny variance
    }
    CHECK(row(report, "loglog_slope").comparator == doctest::Approx(2.0));

    cfg.n_grid = {6, 8};
    CHECK_THROWS_AS(concentration_scaling(cfg), std::invalid_argument);
    cfg.n_grid = {6, 8, 10};
    cfg.samples = 100;
    CHECK_THROWS_AS(concentration_scaling(cfg), std::invalid_argument);
}

TEST_CASE("coupling deviation profile: exact bound, aggregate scaling, g values") {
    ExperimentConfig cfg;
    cfg.n = 8;
    cfg.samples = 30;
    cfg.base_seed = 21;
    cfg.threads = 4;
    ExperimentReport report = coupling_deviation_profile(cfg);
    CHECK(row(report, "percoupling_violations").estimate == 0.0);
    CHECK(row(report, "burkholder_sum").pass);
    CHECK(row(report, "g_p").estimate ==
          doctest::Approx(2.0 - 1.25 * (1.0 + 1.0 / 1.5)).epsilon(1e-12));
    // g(alpha - 0.1) = g(1.4) = -1/3 at alpha = 1.5
    const ReportRow& ga = row(report, "g_alpha_minus_0.1");
    CHECK(ga.estimate == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    CHECK(ga.pass);
}

TEST_CASE("a zero-weight coupling produces exactly zero deviation") {
    ModelInstance inst;
    inst.n_sites = 4;
    inst.alpha = 1.5;
    inst.norm_size = 4.0;
    inst.beta = 1.0;
    inst.edges = {{1, 2, 1.7}, {2, 3, 0.0}, {3, 4, -0.9}};
    double with = log_partition(inst).log_z;
    double without = log_partition(drop_edge(inst, 1)).log_z;
    CHECK(with == doctest::Approx(without).epsilon(1e-14));
}

TEST_CASE("growth process formulas and hand values") {
    CHECK(growth_expected_time(3, 2) == doctest::Approx(5.0));
    CHECK(growth_step_probability(3, 1) == doctest::Approx(0.5));
    CHECK(growth_step_probability(3, 2) == doctest::Approx(1.0 / 3.0));

    RngStream rng(77);
    GrowthTrace empty = simulate_growth(4, 0, rng);
    CHECK(empty.total == 0);
    CHECK(empty.passage_times.empty());

    GrowthTrace trace = simulate_growth(5, 6, rng);
    CHECK(trace.total == static_cast<long long>(trace.distinct_after_step.size()));
    long long sum = 0;
    for (long long t : trace.passage_times) sum += t;
    CHECK(sum == trace.total);
    long long prev = 0;
    for (long long d : trace.distinct_after_step) {
        CHECK(d - prev <= 1);
        CHECK(d >= prev);
        prev = d;
    }
    CHECK(prev == 6);

    CHECK_THROWS_AS(simulate_growth(3, 4, rng), std::invalid_argument);
}

TEST_CASE("simulated growth matches the harmonic-sum mean") {
    RngStream rng(31);
    const int reps = 3000;
    std::vector<double> totals(reps);
    for (int i = 0; i < reps; ++i) totals[i] = static_cast<double>(simulate_growth(3, 2, rng).total);
    MeanStderr m = mean_stderr(totals);
    CHECK(std::fabs(m.mean - 5.0) < 3.0 * m.se);
}

TEST_CASE("single multi-edge draw is a loop with probability N/A") {
    TailLaw law(1.5, 1.0);
    RngStream rng(41);
    const int reps = 20000;
    int loops = 0;
    for (int i = 0; i < reps; ++i) {
        ModelInstance inst = build_multiedge(1, 4, 4.0, law, 0.1, 1.0, rng);
        long long f = duplicate_count(inst);
        CHECK((f == 0 || f == 1));
        if (f == 1) ++loops;
    }
    double p = 4.0 / 10.0;  // N / (N(N+1)/2)
    double se = std::sqrt(p * (1.0 - p) / reps);
    CHECK(std::fabs(static_cast<double>(loops) / reps - p) < 4.0 * se);
}

TEST_CASE("multiedge_loop_stats report") {
    ExperimentConfig cfg;
    cfg.n = 6;
    cfg.c0 = 1.0;
    cfg.samples = 2000;
    cfg.base_seed = 19;
    cfg.threads = 4;
    ExperimentReport report = multiedge_loop_stats(cfg);
    CHECK(row(report, "dup_mean").estimate >= 0.0);
    CHECK(row(report, "growth_T_mean").pass);
    CHECK(row(report, "growth_geom_min_p").pass);
}

TEST_CASE("edge count concentration at the calibration point") {
    ExperimentConfig cfg;
    cfg.n = 100;
    cfg.c0 = 1.0;
    cfg.samples = 1000;
    cfg.base_seed = 23;
    cfg.threads = 4;
    ExperimentReport report = edge_count_concentration(cfg);

    const ReportRow& formula = row(report, "binomial_vs_formula");
    CHECK(formula.estimate == doctest::Approx(4950.0 * std::pow(100.0, -0.85)).epsilon(1e-12));
    CHECK(formula.comparator == doctest::Approx(0.5 * std::pow(100.0, 1.15)).epsilon(1e-12));
    CHECK(formula.pass);

    CHECK(row(report, "mean_vs_binomial").pass);
    CHECK(row(report, "exceedance_freq").pass);
    // face-value window is reported but not gated
    CHECK(row(report, "exceedance_freq_unit_c").margin == 0.0);
}

TEST_CASE("jensen audit: exact rows clean, mean <y> compatible with zero") {
    ExperimentConfig cfg;
    cfg.n = 8;
    cfg.samples = 200;
    cfg.base_seed = 29;
    cfg.threads = 4;
    ExperimentReport report = jensen_sandwich_audit(cfg);
    CHECK(row(report, "trunc_exact_violations").estimate == 0.0);
    CHECK(row(report, "block_exact_violations").estimate == 0.0);
    CHECK(row(report, "trunc_lower").pass);
    CHECK(row(report, "trunc_upper").pass);
    CHECK(row(report, "block_lower").pass);
    CHECK(row(report, "block_upper").pass);
    CHECK(row(report, "trunc_mean_y").pass);
}

TEST_CASE("boundedness audit across controls") {
    ExperimentConfig cfg;
    cfg.n_grid = {8, 16};
    cfg.samples = 100;
    cfg.base_seed = 31;
    cfg.threads = 4;
    ExperimentReport report = boundedness_audit(cfg);
    for (int n : cfg.n_grid) CHECK(row_at(report, "bounded", n).pass);

    cfg.c0 = 0.01;
    ExperimentReport control = boundedness_audit(cfg);
    for (int n : cfg.n_grid) {
        const ReportRow& r = row_at(control, "bounded", n);
        CHECK(std::fabs(r.estimate - std::log(2.0)) < 0.05);
        CHECK(r.pass);
    }

    cfg.c0 = 0.5;
    cfg.beta = 1e-9;
    ExperimentReport cold = boundedness_audit(cfg);
    for (int n : cfg.n_grid) {
        const ReportRow& r = row_at(cold, "bounded", n);
        CHECK(r.comparator == doctest::Approx(std::log(2.0)).epsilon(1e-6));
        CHECK(r.pass);
    }
}

TEST_CASE("subadditivity hypothesis checker") {
    std::map<int, double> additive;
    for (int n = 3; n <= 30; ++n) additive[n] = -n * std::log(2.0);
    ExperimentReport clean = subadditivity_hypothesis_check(additive, 0.5, 0.0);
    CHECK(row(clean, "violations").estimate == 0.0);
    CHECK(row(clean, "splits_checked").estimate > 0.0);

    std::map<int, double> quadratic;
    for (int n = 3; n <= 30; ++n) quadratic[n] = static_cast<double>(n) * n;
    ExperimentReport dirty = subadditivity_hypothesis_check(quadratic, 0.5, 5.0);
    CHECK(row(dirty, "violations").estimate > 0.0);
    CHECK(!row(dirty, "violations").pass);

    CHECK_THROWS_AS(subadditivity_hypothesis_check({}, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("measured multi-edge series satisfies the subadditivity hypothesis") {
    ExperimentConfig cfg;
    cfg.c0 = 1.0;
    cfg.samples = 150;
    cfg.base_seed = 37;
    cfg.threads = 4;
    std::map<int, double> series;
    for (int n = 6; n <= 12; ++n) {
        cfg.n = n;
        ExperimentReport fe = quenched_free_energy(cfg, ModelKind::multi_edge);
        series[n] = -row(fe, "F_multi_edge").estimate * n;  // -E log Z
    }
    double gamma = 1.0 + 0.1 * (cfg.alpha - 2.0);
    ExperimentReport report = subadditivity_hypothesis_check(series, gamma, 5.0);
    CHECK(row(report, "violations").estimate == 0.0);
}
