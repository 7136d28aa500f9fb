#ifndef SMSIM_RNG_HPP
#define SMSIM_RNG_HPP

#include <cmath>
#include <cstdint>

namespace smsim {

/// Counter-free splitmix64 generator. Self-contained so that streams are
/// bit-identical across compilers and standard libraries, which the
/// per-trial seed-derivation contract of the sweep engine relies on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n).
    std::uint32_t uniform_int(std::uint32_t n) {
        // Modulo bias is < 2^-32 for the small n used here (antenna counts).
        return static_cast<std::uint32_t>(next_u64() % n);
    }

    bool bit() { return (next_u64() >> 63) != 0; }

    /// Standard normal via Box-Muller, one spare cached.
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Order-sensitive mixing of seed material (master seed, point index,
/// trial index, ...). Same inputs give the same stream everywhere.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace smsim

#endif
