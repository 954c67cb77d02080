#ifndef LEVYGLASS_TAIL_LAW_HPP
#define LEVYGLASS_TAIL_LAW_HPP

#include <cstddef>

#include "levyglass/rng.hpp"

namespace levyglass {

// Symmetric coupling law with an exact power-law tail:
//   P(|J| >= t) = c0 * t^(-alpha)          for t > 1,
//   P(|J| >= t) = 1 - (1 - c0) * t         for t in [0, 1].
// The magnitude is a mixture: Pareto(alpha, min 1) with mass c0, uniform on
// [0, 1] with mass 1 - c0. Signs are independent fair coin flips.
struct TailLaw {
    double alpha;  // tail exponent, in (1, 2) away from the endpoints
    double c0;     // tail constant, in (0, 1]

    TailLaw(double alpha, double c0);

    // alpha is kept at least this far from 1 and 2; several closed forms
    // (e.g. R^(2-alpha)/(2-alpha)) degenerate at the endpoints.
    static constexpr double alpha_margin = 0.01;
};

enum class ConditionMode { below, above, rescaled };

// Conditioning window for the derived samplers: `above R`, `below R`, or the
// rescaled tail law used by the sparse models (|J| >= m^(1/alpha - eps)).
struct ConditionedSpec {
    ConditionMode mode;
    double threshold;   // magnitude R
    double norm_size;   // rescaled mode only: m >= 1
    double epsilon;     // rescaled mode only: tail-cut exponent

    static ConditionedSpec below(double r);
    static ConditionedSpec above(double r);
    static ConditionedSpec rescaled(double m, double epsilon, double alpha);
};

// P(|J| >= t).
double tail_prob(const TailLaw& law, double t);

// P(|J| <= t); the analytic magnitude CDF, used by the KS fidelity checks.
double magnitude_cdf(const TailLaw& law, double t);

// One draw of J. Inverse transform, two uniforms per call (sign, magnitude).
double sample(const TailLaw& law, RngStream& rng);

// One draw of J conditioned per `spec`. Also two uniforms per call.
double sample_conditioned(const TailLaw& law, const ConditionedSpec& spec, RngStream& rng);

// E[J^2 1{|J| < R}] in closed form, R >= 1.
double truncated_second_moment(const TailLaw& law, double r);

// E[|J| 1{|J| >= R}] in closed form, R >= 1.
double tail_mean_above(const TailLaw& law, double r);

// E[|J|], finite for alpha > 1.
double abs_mean(const TailLaw& law);

// E[|J|^p] for 0 < p < alpha.
double abs_moment(const TailLaw& law, double p);

struct ExpMomentAudit {
    double estimate;       // Monte Carlo mean of exp(lambda * (1 - L) * a)
    double stderr_;        // its standard error
    double bound;          // exp(lambda^2 * E[J^2 1{|J| < R}])
    bool pass;
};

// Monte Carlo audit of the exponential moment bound for the centered,
// bounded summand lambda * (1 - L) * a with L ~ Bernoulli(tail_prob(R)) and
// a distributed as J conditioned below R. Requires lambda * R <= 1 so the
// summand is bounded by 1. Passes when the estimate does not exceed the
// closed-form bound beyond three standard errors.
ExpMomentAudit exp_moment_audit(const TailLaw& law, double r, double lambda,
                                std::size_t n, RngStream& rng);

}  // namespace levyglass

#endif
