#ifndef LEVYGLASS_STATS_HPP
#define LEVYGLASS_STATS_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace levyglass {

// Compensated (Kahan) accumulator. Reductions over disorder replicas run in
// fixed index order through one of these, so results do not depend on thread
// count.
class KahanAccumulator {
public:
    void add(double x) {
        double y = x - c_;
        double t = sum_ + y;
        c_ = (t - sum_) - y;
        sum_ = t;
    }
    double sum() const { return sum_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

double kahan_sum(std::span<const double> xs);

struct MeanStderr {
    double mean;
    double se;
    std::size_t n;
};

MeanStderr mean_stderr(std::span<const double> xs);

// Standard error of the difference of two independent estimates.
double combined_se(double se_a, double se_b);

// Sample variance (ddof = 1) with a jackknife standard error.
struct VarianceEstimate {
    double variance;
    double se;
};
VarianceEstimate variance_with_jackknife(std::span<const double> xs);

// Two-sided Kolmogorov-Smirnov statistic against an analytic CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Asymptotic critical value at the 1% level.
double ks_critical_1pct(std::size_t n);

double normal_cdf(double z);

// Normal quantile for two-sided tests; z such that P(|Z| > z) = level.
double two_sided_z(double level);

// Regularized upper incomplete gamma Q(a, x); chi-square survival is
// Q(dof/2, x/2).
double regularized_gamma_q(double a, double x);

double chi_square_p_value(double stat, int dof);

// Pearson chi-square of observed counts against expected counts, pooling
// trailing cells until every expected count reaches min_expected.
struct ChiSquareResult {
    double stat;
    int dof;
    double p_value;
};
ChiSquareResult chi_square_gof(std::span<const double> observed,
                               std::span<const double> expected,
                               double min_expected = 5.0);

// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace levyglass

#endif
