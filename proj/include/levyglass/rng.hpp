#ifndef LEVYGLASS_RNG_HPP
#define LEVYGLASS_RNG_HPP

#include <bit>
#include <cstdint>
#include <random>
#include <string_view>

namespace levyglass {

// SplitMix64 finalizer. Used to spread structured seed material before it
// reaches the engine.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Stream seed for disorder replica `index` of a named experiment. Replicas
// are independent streams regardless of execution order, so parallel runs
// reproduce serial ones exactly.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view experiment,
                                 std::uint64_t index) {
    return mix64(base_seed ^ mix64(fnv1a64(experiment) ^ mix64(index)));
}

// Deterministic random stream. mt19937_64 output is fixed by the standard,
// so identical seeds give identical draws on every platform; the double
// conversions below avoid std::uniform_real_distribution, whose output is
// implementation-defined.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as an argument to log or pow with a negative
    // exponent.
    double uniform_pos() { return 1.0 - uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Exact uniform integer in [0, bound) by masked rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(bound - 1);
        for (;;) {
            std::uint64_t x = gen_() & mask;
            if (x < bound) return x;
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace levyglass

#endif
