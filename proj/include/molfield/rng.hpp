#ifndef MOLFIELD_RNG_HPP
#define MOLFIELD_RNG_HPP

#include <cstdint>
#include <cmath>
#include <stdexcept>

// Deterministic random streams. Every stream is identified by a 64-bit key;
// child keys are derived from (key, id) with a fixed mixing function, so a
// stream's output depends only on its key and never on which thread created
// it or in what order. All samplers are implemented here (not taken from
// <random>) because distribution algorithms in the standard library are
// implementation-defined and would break bit-identical replay across
// compilers.
namespace molfield {
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Order-independent child-key derivation.
inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t id) {
    std::uint64_t s = key ^ (0xD1B54A32D192ED03ULL * (id + 1));
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    return a ^ (b >> 1);
}

// xoshiro256++ core with derived-key seeding.
class Stream {
public:
    explicit Stream(std::uint64_t key) : key_(key) {
        std::uint64_t s = key;
        for (auto& w : s_) w = splitmix64(s);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }
    Stream(std::uint64_t seed, std::uint64_t stream_id) : Stream(derive_key(seed, stream_id)) {}

    std::uint64_t key() const { return key_; }

    // Children are salted so Stream(seed, i) and Stream(seed).substream(i)
    // never coincide.
    Stream substream(std::uint64_t id) const {
        return Stream(derive_key(key_ ^ 0xA3C59AC2F0B9D1E5ULL, id));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0,1), 53-bit resolution
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // uniform in (0,1); safe under log()
    double u01_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    // Marsaglia polar method; the spare deviate is cached per stream.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double x, y, s;
        do {
            x = 2.0 * u01() - 1.0;
            y = 2.0 * u01() - 1.0;
            s = x * x + y * y;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = y * f;
        has_spare_ = true;
        return x * f;
    }
    double normal(double mean, double sd) { return mean + sd * normal(); }

    std::uint64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
        if (mean == 0.0) return 0;
        if (mean < 10.0) return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

    std::uint64_t binomial(std::uint64_t n, double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p must be in [0,1]");
        if (n == 0 || p == 0.0) return 0;
        if (p == 1.0) return n;
        if (p > 0.5) return n - binomial(n, 1.0 - p);
        if (n <= 64) {
            std::uint64_t k = 0;
            for (std::uint64_t i = 0; i < n; ++i) k += (u01() < p);
            return k;
        }
        // A Binomial(n,p) variate is the sum of independent halves, so large
        // means reduce exactly to the small-mean inversion below.
        if (static_cast<double>(n) * p > 30.0) {
            const std::uint64_t half = n / 2;
            const std::uint64_t lo = binomial(half, p);
            return lo + binomial(n - half, p);
        }
        return binomial_inversion(n, p);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t poisson_inversion(double mean) {
        const double l = std::exp(-mean);
        double p = l, cdf = l;
        const double u = u01();
        std::uint64_t k = 0;
        while (u > cdf) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
            if (k > 2000) break;  // cdf has numerically saturated
        }
        return k;
    }

    // Hörmann's transformed rejection (PTRS), exact for mean >= 10.
    std::uint64_t poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double llam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = u01() - 0.5;
            const double v = u01_open();
            const double us = 0.5 - std::fabs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
                kf * llam - mean - std::lgamma(kf + 1.0))
                return static_cast<std::uint64_t>(kf);
        }
    }

    std::uint64_t binomial_inversion(std::uint64_t n, double p) {
        const double q = 1.0 - p;
        const double r = p / q;
        double f = std::pow(q, static_cast<double>(n));  // n*p <= 30 so no underflow
        double cdf = f;
        const double u = u01();
        std::uint64_t k = 0;
        while (u > cdf && k < n) {
            ++k;
            f *= r * static_cast<double>(n - k + 1) / static_cast<double>(k);
            cdf += f;
        }
        return k;
    }

    std::uint64_t s_[4];
    std::uint64_t key_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rng
}  // namespace molfield

#endif
