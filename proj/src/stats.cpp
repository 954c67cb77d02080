#include "levyglass/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace levyglass {

double kahan_sum(std::span<const double> xs) {
    KahanAccumulator acc;
    for (double x : xs) acc.add(x);
    return acc.sum();
}

MeanStderr mean_stderr(std::span<const double> xs) {
    std::size_t n = xs.size();
    if (n == 0) throw std::invalid_argument("mean_stderr: empty sample");
    double mean = kahan_sum(xs) / static_cast<double>(n);
    if (n == 1) return {mean, 0.0, 1};
    KahanAccumulator sq;
    for (double x : xs) sq.add((x - mean) * (x - mean));
    double var = sq.sum() / static_cast<double>(n - 1);
    return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(n)), n};
}

double combined_se(double se_a, double se_b) { return std::hypot(se_a, se_b); }

VarianceEstimate variance_with_jackknife(std::span<const double> xs) {
    std::size_t n = xs.size();
    if (n < 3) throw std::invalid_argument("variance_with_jackknife: need n >= 3");
    double nn = static_cast<double>(n);
    double mean = kahan_sum(xs) / nn;
    KahanAccumulator sq;
    for (double x : xs) sq.add((x - mean) * (x - mean));
    double ss = sq.sum();
    double var = ss / (nn - 1.0);

    // Leave-one-out variances from the sufficient statistics.
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = xs[i] - mean;
        double ss_i = ss - d * d * nn / (nn - 1.0);
        loo[i] = ss_i / (nn - 2.0);
    }
    double loo_mean = kahan_sum(loo) / nn;
    KahanAccumulator dev;
    for (double v : loo) dev.add((v - loo_mean) * (v - loo_mean));
    double se = std::sqrt(std::max(dev.sum(), 0.0) * (nn - 1.0) / nn);
    return {var, se};
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
        d = std::max(d, f - static_cast<double>(i) / n);
    }
    return d;
}

double ks_critical_1pct(std::size_t n) {
    // Asymptotic Kolmogorov quantile K(0.01).
    return 1.62762 / std::sqrt(static_cast<double>(n));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double two_sided_z(double level) {
    // Bisection on the survival function; plenty for test thresholds.
    double lo = 0.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double tail = 2.0 * (1.0 - normal_cdf(mid));
        (tail > level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// Regularized lower incomplete gamma by series expansion, x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma by Lentz continued fraction, x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("regularized_gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_p_value(double stat, int dof) {
    if (dof <= 0) throw std::invalid_argument("chi_square_p_value: dof must be positive");
    return regularized_gamma_q(0.5 * dof, 0.5 * stat);
}

ChiSquareResult chi_square_gof(std::span<const double> observed,
                               std::span<const double> expected,
                               double min_expected) {
    if (observed.size() != expected.size() || observed.empty())
        throw std::invalid_argument("chi_square_gof: size mismatch");
    std::vector<double> obs, exp;
    double o_pool = 0.0, e_pool = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o_pool += observed[i];
        e_pool += expected[i];
        if (e_pool >= min_expected) {
            obs.push_back(o_pool);
            exp.push_back(e_pool);
            o_pool = e_pool = 0.0;
        }
    }
    if (e_pool > 0.0 || o_pool > 0.0) {
        if (exp.empty()) {
            obs.push_back(o_pool);
            exp.push_back(e_pool);
        } else {
            obs.back() += o_pool;
            exp.back() += e_pool;
        }
    }
    if (exp.size() < 2)
        return {0.0, 1, 1.0};  // everything pooled into one cell: no test possible
    double stat = 0.0;
    for (std::size_t i = 0; i < exp.size(); ++i) {
        double d = obs[i] - exp[i];
        stat += d * d / exp[i];
    }
    int dof = static_cast<int>(exp.size()) - 1;
    return {stat, dof, chi_square_p_value(stat, dof)};
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("log_log_slope: need matching series of length >= 2");
    double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lx = std::log(x[i]);
        double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace levyglass
