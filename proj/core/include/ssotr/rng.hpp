#ifndef SSOTR_RNG_HPP
#define SSOTR_RNG_HPP

#include <cstdint>
#include <cmath>
#include <random>
#include <vector>

namespace ssotr {

/// Seeded random stream with explicit sampling transforms so that a
/// given (seed, call sequence) produces the same draws on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the spare draw is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * M_PI * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    /// Standard normal conditioned on [lo, hi] by rejection resampling.
    double truncated_normal(double lo, double hi) {
        for (;;) {
            double z = normal();
            if (z >= lo && z <= hi) return z;
        }
    }

    int bernoulli(double p) { return uniform() < p ? 1 : 0; }

    /// Unbiased integer in [0, n) by rejection on the top of the range.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        for (;;) {
            std::uint64_t r = engine_();
            if (r < limit) return r % n;
        }
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[below(i)]);
        }
    }

    /// SplitMix64 finalizer; decorrelates nearby inputs.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    /// Derives an independent stream seed from a base seed and stream id.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
        return mix(mix(base) + stream);
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace ssotr

#endif
