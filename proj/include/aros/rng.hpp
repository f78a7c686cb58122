#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace aros {

// splitmix64, the standard 64-bit mix used to expand one seed into many.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based seed derivation: every consumer of randomness gets its own
// stream derived from (master, label, index). Derivation is pure, so results
// never depend on call order or thread scheduling. The same triple always
// yields the same stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
    // FNV-1a over the label, then two mix rounds against master and index.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(master ^ h) ^ splitmix64(index));
}

// Thin wrapper so the engine choice lives in one place. mt19937_64 everywhere;
// distributions below are hand-rolled where the C++ standard leaves the
// algorithm unspecified (we need bit-identical streams across stdlibs).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform in [0, 1): 53 random mantissa bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via polar Box-Muller; caches the second deviate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
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
        have_spare_ = true;
        return u * m;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, n). Rejection keeps the distribution exact.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
        std::uint64_t r;
        do {
            r = eng_();
        } while (r >= limit);
        return r % n;
    }

    // Poisson deviate. Knuth multiplication for small means, PTRS-style
    // normal-approximation-free rejection is overkill at desk scale, so large
    // means fall back to a normal approximation rounded to the nearest
    // non-negative integer (documented behavior for lambda > 720 where the
    // product would underflow).
    std::uint64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda < 720.0) {
            const double limit = std::exp(-lambda);
            std::uint64_t k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform();
            } while (p > limit);
            return k - 1;
        }
        const double x = lambda + std::sqrt(lambda) * normal();
        return x <= 0.0 ? 0 : static_cast<std::uint64_t>(x + 0.5);
    }

    // Fisher-Yates shuffle, deterministic given the stream.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace aros
