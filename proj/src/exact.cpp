#include "levyglass/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "levyglass/errors.hpp"
#include "levyglass/stats.hpp"

namespace levyglass {

namespace {

void check_cap(const ModelInstance& inst, int cap, const char* who) {
    if (inst.n_sites < 1) throw std::invalid_argument(std::string(who) + ": empty instance");
    if (inst.n_sites > cap)
        throw capacity_exceeded(std::string(who) + ": n = " + std::to_string(inst.n_sites) +
                                " exceeds enumeration cap " + std::to_string(cap));
}

// Per-site adjacency of scaled non-loop couplings; loops are a spin-independent
// offset since sigma_i^2 = 1.
struct EnumPlan {
    int n;
    double beta;
    double loop_offset;                                  // scaled loop weight sum
    std::vector<std::vector<std::pair<int, double>>> adj;  // 0-based site -> (other, w~)

    explicit EnumPlan(const ModelInstance& inst)
        : n(inst.n_sites), beta(inst.beta), loop_offset(0.0), adj(inst.n_sites) {
        double scale = inst.energy_scale();
        for (const Edge& e : inst.edges) {
            double ws = e.w * scale;
            if (e.i == e.j) {
                loop_offset += ws;
            } else {
                adj[e.i - 1].push_back({e.j - 1, ws});
                adj[e.j - 1].push_back({e.i - 1, ws});
            }
        }
    }

    // Energy of the all-minus configuration (every pair product is +1).
    double base_energy() const {
        double acc = loop_offset;
        for (int s = 0; s < n; ++s)
            for (auto [t, w] : adj[s])
                if (t > s) acc += w;
        return acc;
    }

    double energy_of(std::uint32_t bits) const {
        double acc = loop_offset;
        for (int s = 0; s < n; ++s) {
            int ss = (bits >> s) & 1u ? 1 : -1;
            for (auto [t, w] : adj[s])
                if (t > s) acc += w * ss * ((bits >> t) & 1u ? 1 : -1);
        }
        return acc;
    }
};

// Gray-code walk over all 2^n configurations. The visitor sees the packed
// configuration and its energy. Incremental updates are re-anchored with a
// full recompute every 2^16 steps to stop rounding drift.
template <typename Visit>
void enumerate(const EnumPlan& plan, Visit&& visit) {
    const std::uint64_t total = std::uint64_t{1} << plan.n;
    std::vector<int> spins(plan.n, -1);
    std::uint32_t bits = 0;
    double energy = plan.base_energy();
    visit(bits, energy);
    for (std::uint64_t g = 1; g < total; ++g) {
        int k = std::countr_zero(g);
        bits ^= (std::uint32_t{1} << k);
        spins[k] = -spins[k];
        if ((g & 0xffffULL) == 0) {
            energy = plan.energy_of(bits);
        } else {
            double delta = 0.0;
            for (auto [t, w] : plan.adj[k]) delta += w * spins[t];
            energy += 2.0 * spins[k] * delta;
        }
        visit(bits, energy);
    }
}

// Streaming max-shifted exp accumulator with compensated summation.
class LogSumExp {
public:
    void add(double value) {
        if (value > shift_) {
            double rescale = std::exp(shift_ - value);
            sum_ *= rescale;
            comp_ *= rescale;
            shift_ = value;
        }
        double x = std::exp(value - shift_);
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double log_sum() const { return shift_ + std::log(sum_); }
    double shift() const { return shift_; }
    double mass() const { return sum_; }

private:
    double shift_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace

bool ExactSummary::sandwich_holds(double slack) const {
    double center = n * std::log(2.0);
    double halfwidth = beta * scaled_weight_sum;
    double tol = slack * (1.0 + std::fabs(log_z));
    return log_z >= center - halfwidth - tol && log_z <= center + halfwidth + tol;
}

ExactSummary log_partition(const ModelInstance& inst) {
    check_cap(inst, enumeration_cap, "log_partition");
    EnumPlan plan(inst);
    LogSumExp z;
    enumerate(plan, [&](std::uint32_t, double e) { z.add(plan.beta * e); });

    ExactSummary out;
    out.log_z = z.log_sum();
    out.n = inst.n_sites;
    out.beta = inst.beta;
    double ws = 0.0;
    double scale = inst.energy_scale();
    for (const Edge& e : inst.edges) ws += std::fabs(e.w) * scale;
    out.scaled_weight_sum = ws;
    // |beta H| <= beta sum |w~| pointwise, so a violated sandwich means the
    // accumulation lost precision; fail loudly instead of reporting garbage.
    if (!out.sandwich_holds())
        throw std::runtime_error("log_partition: log Z escaped the n log 2 +- beta sum|w~| "
                                 "sandwich; numerical failure");
    return out;
}

double gibbs_expectation(const ModelInstance& inst,
                         const std::function<double(const SpinConfig&)>& f) {
    check_cap(inst, enumeration_cap, "gibbs_expectation");
    EnumPlan plan(inst);

    // Shared shift for numerator and denominator; the numerator is a plain
    // compensated sum because f may change sign.
    double shift = -std::numeric_limits<double>::infinity();
    KahanAccumulator num, den;
    enumerate(plan, [&](std::uint32_t bits, double e) {
        double value = plan.beta * e;
        if (value > shift) {
            if (std::isfinite(shift)) {
                double rescale = std::exp(shift - value);
                KahanAccumulator n2, d2;
                n2.add(num.sum() * rescale);
                d2.add(den.sum() * rescale);
                num = n2;
                den = d2;
            }
            shift = value;
        }
        double w = std::exp(value - shift);
        num.add(f(SpinConfig{inst.n_sites, bits}) * w);
        den.add(w);
    });
    return num.sum() / den.sum();
}

double agree_probability(const ModelInstance& inst, int i, int j) {
    if (i < 1 || i > inst.n_sites || j < 1 || j > inst.n_sites)
        throw std::invalid_argument("agree_probability: site out of range");
    if (i == j) return 1.0;
    return gibbs_expectation(inst, [i, j](const SpinConfig& s) {
        return s.spin(i) == s.spin(j) ? 1.0 : 0.0;
    });
}

std::vector<std::vector<double>> agreement_matrix(const ModelInstance& inst) {
    check_cap(inst, 20, "agreement_matrix");
    EnumPlan plan(inst);
    int n = inst.n_sites;

    // Pass 1: locate the max-shift so pass 2 can accumulate with a fixed one.
    LogSumExp z;
    enumerate(plan, [&](std::uint32_t, double e) { z.add(plan.beta * e); });
    const double shift = z.shift();

    std::vector<double> agree(static_cast<std::size_t>(n) * n, 0.0);
    double mass = 0.0;
    enumerate(plan, [&](std::uint32_t bits, double e) {
        double w = std::exp(plan.beta * e - shift);
        mass += w;
        for (int a = 0; a < n; ++a) {
            bool sa = (bits >> a) & 1u;
            for (int b = a + 1; b < n; ++b)
                if (sa == (((bits >> b) & 1u) != 0)) agree[a * n + b] += w;
        }
    });

    std::vector<std::vector<double>> out(n, std::vector<double>(n, 1.0));
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            out[a][b] = out[b][a] = agree[a * n + b] / mass;
    return out;
}

ReplicaClasses replica_partition(const std::vector<SpinConfig>& replicas) {
    if (replicas.empty()) throw std::invalid_argument("replica_partition: no replicas");
    int k = static_cast<int>(replicas.size());
    if (k > 64) throw std::invalid_argument("replica_partition: at most 64 replicas");
    int n = replicas.front().n;
    for (const SpinConfig& s : replicas)
        if (s.n != n) throw std::invalid_argument("replica_partition: mismatched lengths");

    // Site signature: one bit per replica.
    std::map<std::uint64_t, int> class_of_key;
    ReplicaClasses out;
    out.k = k;
    out.n = n;
    std::vector<std::uint64_t> keys;
    for (int site = 1; site <= n; ++site) {
        std::uint64_t key = 0;
        for (int l = 0; l < k; ++l)
            if (replicas[l].spin(site) > 0) key |= std::uint64_t{1} << l;
        auto [it, fresh] = class_of_key.try_emplace(key, static_cast<int>(out.classes.size()));
        if (fresh) {
            out.classes.emplace_back();
            keys.push_back(key);
        }
        out.classes[it->second].push_back(site);
    }

    std::uint64_t mask = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
    out.partner.assign(out.classes.size(), -1);
    for (std::size_t s = 0; s < keys.size(); ++s) {
        auto it = class_of_key.find(~keys[s] & mask);
        if (it != class_of_key.end()) out.partner[s] = it->second;
    }
    return out;
}

PairCertificate convexity_pair(long long os_in_a, long long os_in_b, long long or_in_a,
                               long long or_in_b, int n1, int n2) {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("convexity_pair: blocks must be nonempty");
    double n = static_cast<double>(n1) + static_cast<double>(n2);
    double in_a = static_cast<double>(os_in_a + or_in_a) / n1;
    double in_b = static_cast<double>(os_in_b + or_in_b) / n2;
    PairCertificate cert;
    cert.lhs = (n1 / n) * in_a * in_a + (n2 / n) * in_b * in_b;
    double total = static_cast<double>(os_in_a + os_in_b + or_in_a + or_in_b) / n;
    cert.rhs = total * total;
    cert.pass = cert.lhs >= cert.rhs - 1e-12;
    return cert;
}

namespace {

std::pair<long long, long long> block_counts(const std::vector<int>& sites, int n1) {
    long long in_a = 0;
    for (int s : sites)
        if (s <= n1) ++in_a;
    return {in_a, static_cast<long long>(sites.size()) - in_a};
}

}  // namespace

PairCertificate convexity_pair_certificate(const ReplicaClasses& classes,
                                           std::size_t class_index, int n1, int n2) {
    if (class_index >= classes.classes.size())
        throw std::invalid_argument("convexity_pair_certificate: bad class index");
    if (n1 + n2 != classes.n)
        throw std::invalid_argument("convexity_pair_certificate: n1 + n2 must equal n");
    int r = classes.partner[class_index];
    if (r < 0)
        throw not_applicable("convexity_pair_certificate: class has no partner");
    auto [sa, sb] = block_counts(classes.classes[class_index], n1);
    auto [ra, rb] = block_counts(classes.classes[static_cast<std::size_t>(r)], n1);
    return convexity_pair(sa, sb, ra, rb, n1, n2);
}

std::vector<PairCertificate> convexity_certificate(const ReplicaClasses& classes, int n1,
                                                   int n2) {
    if (n1 + n2 != classes.n)
        throw std::invalid_argument("convexity_certificate: n1 + n2 must equal n");
    std::vector<PairCertificate> out;
    for (std::size_t s = 0; s < classes.classes.size(); ++s) {
        int r = classes.partner[s];
        if (r < 0 || static_cast<std::size_t>(r) < s) continue;  // each pair once
        out.push_back(convexity_pair_certificate(classes, s, n1, n2));
    }
    return out;
}

namespace {

// Sign-averaged exact log-partition gain of one extra coupling of scaled
// magnitude t on a pair with Gibbs agreement probability p:
//   (1/2) [log<e^{t s s'}> + log<e^{-t s s'}>] = (1/2) log1p(2p(1-p)(cosh 2t - 1)).
double sign_averaged_gain(double p, double t) {
    double q = 2.0 * p * (1.0 - p);
    return 0.5 * std::log1p(q * (std::cosh(2.0 * t) - 1.0));
}

}  // namespace

StepGap interpolation_step_gap(const ModelInstance& base, double x, int n1) {
    check_cap(base, 20, "interpolation_step_gap");
    if (!(x >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument("interpolation_step_gap: x must be finite and >= 0");
    int n = base.n_sites;
    if (n1 < 1 || n1 > n - 1)
        throw std::invalid_argument("interpolation_step_gap: need 1 <= n1 <= n-1");
    int n2 = n - n1;
    double t = base.beta * x;

    auto p = agreement_matrix(base);

    // Loops have p = 1, hence zero sign-averaged gain; they still count in the
    // pair totals below, matching the uniform i <= j edge laws.
    auto pair_total = [](long long v) { return v * (v + 1) / 2; };
    KahanAccumulator all_pairs, block_a, block_b;
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            double g = sign_averaged_gain(p[i - 1][j - 1], t);
            all_pairs.add(g);
            if (j <= n1)
                block_a.add(g);
            else if (i > n1)
                block_b.add(g);
        }
    }

    StepGap gap;
    gap.gap_r = all_pairs.sum() / static_cast<double>(pair_total(n));
    gap.gap_r_minus_1 =
        (static_cast<double>(n1) / n) * block_a.sum() / static_cast<double>(pair_total(n1)) +
        (static_cast<double>(n2) / n) * block_b.sum() / static_cast<double>(pair_total(n2));
    return gap;
}

JensenCertificate jensen_sandwich(const SplitInstance& split) {
    const ModelInstance& kept = split.kept;
    const ModelInstance& dropped = split.dropped;
    if (kept.n_sites != dropped.n_sites || kept.beta != dropped.beta)
        throw std::invalid_argument("jensen_sandwich: malformed split");
    check_cap(kept, enumeration_cap, "jensen_sandwich");

    double log_z_kept = log_partition(kept).log_z;
    double log_z_full = log_partition(recombine(split)).log_z;

    // One pass with both incremental energies: <y> and log<e^y> under the
    // kept-part Gibbs measure, y = beta * H_dropped.
    EnumPlan plan_kept(kept);
    EnumPlan plan_dropped(dropped);
    double beta = kept.beta;

    LogSumExp kept_mass, joint_mass;
    KahanAccumulator y_weighted;
    double shift = -std::numeric_limits<double>::infinity();

    std::vector<int> spins(kept.n_sites, -1);
    std::uint32_t bits = 0;
    double e_kept = plan_kept.base_energy();
    double e_dropped = plan_dropped.base_energy();
    const std::uint64_t total = std::uint64_t{1} << kept.n_sites;
    for (std::uint64_t g = 0;; ++g) {
        if (g > 0) {
            int k = std::countr_zero(g);
            bits ^= (std::uint32_t{1} << k);
            spins[k] = -spins[k];
            if ((g & 0xffffULL) == 0) {
                e_kept = plan_kept.energy_of(bits);
                e_dropped = plan_dropped.energy_of(bits);
            } else {
                double dk = 0.0, dd = 0.0;
                for (auto [t2, w] : plan_kept.adj[k]) dk += w * spins[t2];
                for (auto [t2, w] : plan_dropped.adj[k]) dd += w * spins[t2];
                e_kept += 2.0 * spins[k] * dk;
                e_dropped += 2.0 * spins[k] * dd;
            }
        }
        double vk = beta * e_kept;
        kept_mass.add(vk);
        joint_mass.add(vk + beta * e_dropped);
        if (vk > shift) {
            if (std::isfinite(shift)) {
                KahanAccumulator fresh;
                fresh.add(y_weighted.sum() * std::exp(shift - vk));
                y_weighted = fresh;
            }
            shift = vk;
        }
        y_weighted.add(beta * e_dropped * std::exp(vk - shift));
        if (g + 1 == total) break;
    }

    JensenCertificate cert;
    cert.delta_log_z = log_z_full - log_z_kept;
    // kept_mass tracks the same running max, so its mass shares this shift.
    cert.mean_y = y_weighted.sum() / kept_mass.mass();
    cert.log_mean_exp_y = joint_mass.log_sum() - kept_mass.log_sum();
    double tol = 1e-9 * (1.0 + std::fabs(log_z_full));
    cert.pass = cert.mean_y <= cert.delta_log_z + tol &&
                cert.delta_log_z <= cert.log_mean_exp_y + tol;
    return cert;
}

}  // namespace levyglass
