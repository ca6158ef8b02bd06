#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vhft {

/// Deterministic random stream.
///
/// Wraps a mersenne engine but generates uniform/normal variates itself so that
/// sequences are identical across standard library implementations. Every
/// stochastic component takes one of these explicitly; there is no hidden
/// global state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed)), seed_base_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        // 53 random bits -> double in [0,1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the polar Box-Muller transform.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t next_u64() { return engine_(); }

    /// Independent child stream; stable for a given (seed, id) pair.
    Rng fork(std::uint64_t id) const { return Rng(seed_base_ ^ mix(id)); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        // splitmix64 finalizer; spreads low-entropy seeds over the full state space
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
    std::uint64_t seed_base_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace vhft
