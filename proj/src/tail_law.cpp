#include "levyglass/tail_law.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "levyglass/errors.hpp"

namespace levyglass {

TailLaw::TailLaw(double alpha_in, double c0_in) : alpha(alpha_in), c0(c0_in) {
    if (!std::isfinite(alpha) || alpha < 1.0 + alpha_margin || alpha > 2.0 - alpha_margin)
        throw std::invalid_argument("TailLaw: alpha must lie in [" +
                                    std::to_string(1.0 + alpha_margin) + ", " +
                                    std::to_string(2.0 - alpha_margin) + "], got " +
                                    std::to_string(alpha));
    if (!std::isfinite(c0) || c0 <= 0.0 || c0 > 1.0)
        throw std::invalid_argument("TailLaw: c0 must lie in (0, 1], got " +
                                    std::to_string(c0));
}

ConditionedSpec ConditionedSpec::below(double r) {
    if (!std::isfinite(r) || r <= 0.0)
        throw std::invalid_argument("ConditionedSpec::below: threshold must be > 0");
    return {ConditionMode::below, r, 0.0, 0.0};
}

ConditionedSpec ConditionedSpec::above(double r) {
    if (!std::isfinite(r) || r < 1.0)
        throw unsupported_threshold(
            "ConditionedSpec::above: R must be >= 1 so the conditional law is a pure "
            "power law, got " + std::to_string(r));
    return {ConditionMode::above, r, 0.0, 0.0};
}

ConditionedSpec ConditionedSpec::rescaled(double m, double epsilon, double alpha) {
    if (!std::isfinite(m) || m < 1.0)
        throw std::invalid_argument("ConditionedSpec::rescaled: m must be >= 1");
    if (!(epsilon > 0.0) || epsilon >= 1.0 / alpha)
        throw std::invalid_argument("ConditionedSpec::rescaled: need 0 < epsilon < 1/alpha");
    double r = std::pow(m, 1.0 / alpha - epsilon);
    if (r < 1.0)
        throw unsupported_threshold(
            "ConditionedSpec::rescaled: m^(1/alpha - epsilon) must be >= 1");
    return {ConditionMode::rescaled, r, m, epsilon};
}

double tail_prob(const TailLaw& law, double t) {
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("tail_prob: t must be finite and >= 0");
    if (t <= 1.0) return 1.0 - (1.0 - law.c0) * t;
    return law.c0 * std::pow(t, -law.alpha);
}

double magnitude_cdf(const TailLaw& law, double t) {
    if (t <= 0.0) return 0.0;
    return 1.0 - tail_prob(law, t);
}

namespace {

double sign_draw(RngStream& rng) { return rng.bernoulli(0.5) ? 1.0 : -1.0; }

// Inverse of the magnitude CDF F(t) = (1-c0) t on [0,1], 1 - c0 t^-alpha above.
double magnitude_quantile(const TailLaw& law, double u) {
    double body_mass = 1.0 - law.c0;
    if (u < body_mass) return u / body_mass;
    return std::pow(law.c0 / (1.0 - u), 1.0 / law.alpha);
}

}  // namespace

double sample(const TailLaw& law, RngStream& rng) {
    double s = sign_draw(rng);
    double u = rng.uniform();
    return s * magnitude_quantile(law, u);
}

double sample_conditioned(const TailLaw& law, const ConditionedSpec& spec, RngStream& rng) {
    double s = sign_draw(rng);
    switch (spec.mode) {
        case ConditionMode::above:
        case ConditionMode::rescaled: {
            if (spec.threshold < 1.0)
                throw unsupported_threshold("sample_conditioned: above-threshold < 1");
            // |J| above R >= 1 is exactly Pareto(alpha, min R).
            double u = rng.uniform_pos();
            return s * spec.threshold * std::pow(u, -1.0 / law.alpha);
        }
        case ConditionMode::below: {
            double f_r = magnitude_cdf(law, spec.threshold);
            if (f_r <= 0.0)
                throw std::invalid_argument(
                    "sample_conditioned: P(|J| < R) = 0, conditioning on a null event");
            // Push a uniform into the truncated magnitude CDF F(t)/F(R).
            double u = rng.uniform() * f_r;
            if (spec.threshold <= 1.0) return s * u / (1.0 - law.c0);
            return s * magnitude_quantile(law, u);
        }
    }
    throw std::invalid_argument("sample_conditioned: bad mode");
}

double truncated_second_moment(const TailLaw& law, double r) {
    if (!std::isfinite(r) || r < 1.0)
        throw std::invalid_argument("truncated_second_moment: R must be >= 1");
    double body = (1.0 - law.c0) / 3.0;
    double pareto = law.c0 * law.alpha * (std::pow(r, 2.0 - law.alpha) - 1.0) / (2.0 - law.alpha);
    return body + pareto;
}

double tail_mean_above(const TailLaw& law, double r) {
    if (!std::isfinite(r) || r < 1.0)
        throw std::invalid_argument("tail_mean_above: R must be >= 1");
    return law.c0 * law.alpha * std::pow(r, 1.0 - law.alpha) / (law.alpha - 1.0);
}

double abs_mean(const TailLaw& law) {
    return (1.0 - law.c0) / 2.0 + law.c0 * law.alpha / (law.alpha - 1.0);
}

double abs_moment(const TailLaw& law, double p) {
    if (!(p > 0.0) || p >= law.alpha)
        throw std::invalid_argument("abs_moment: need 0 < p < alpha");
    return (1.0 - law.c0) / (p + 1.0) + law.c0 * law.alpha / (law.alpha - p);
}

ExpMomentAudit exp_moment_audit(const TailLaw& law, double r, double lambda,
                                std::size_t n, RngStream& rng) {
    if (!std::isfinite(r) || r < 1.0)
        throw std::invalid_argument("exp_moment_audit: R must be >= 1");
    if (lambda < 0.0 || lambda * r > 1.0)
        throw hypothesis_violated(
            "exp_moment_audit: need lambda * R <= 1 so the summand is bounded by 1");
    if (n < 2) throw std::invalid_argument("exp_moment_audit: need n >= 2");

    double p = tail_prob(law, r);
    ConditionedSpec below = ConditionedSpec::below(r);

    double sum = 0.0, sumsq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        bool kept = rng.bernoulli(p);  // L = 1: the coupling survives truncation
        double v = kept ? 1.0 : std::exp(lambda * sample_conditioned(law, below, rng));
        sum += v;
        sumsq += v * v;
    }
    double mean = sum / static_cast<double>(n);
    double var = (sumsq - sum * mean) / static_cast<double>(n - 1);
    double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));

    // E[exp(X)] <= exp(E[X^2]) for centered |X| <= 1, and
    // E[X^2] = lambda^2 * (1-p) * E[a^2] = lambda^2 * E[J^2 1{|J| < R}] exactly.
    double bound = std::exp(lambda * lambda * truncated_second_moment(law, r));
    bool pass = mean <= bound * (1.0 + 3.0 * se / bound);
    return {mean, se, bound, pass};
}

}  // namespace levyglass
