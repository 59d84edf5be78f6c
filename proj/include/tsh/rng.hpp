#pragma once

#include <cmath>
#include <cstdint>

namespace tsh {

// splitmix64 finalizer. Used to derive stream states from
// (master_seed, run_index, purpose) so that distinct identifiers give
// statistically independent streams and identical identifiers reproduce
// identical sequences.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum class StreamPurpose : std::uint64_t {
    policy = 0x706f6c696379ULL, // "policy"
    reward = 0x726577617264ULL, // "reward"
    generic = 0x67656eULL,
};

// xoshiro256++ keyed by a splitmix64 chain over (master_seed, run_index,
// purpose). Self-contained so sequences are identical across platforms
// and compilers, unlike the std:: distributions.
class RandomStream {
  public:
    RandomStream() : RandomStream(0, 0, StreamPurpose::generic) {}

    RandomStream(std::uint64_t master_seed, std::uint64_t run_index,
                 StreamPurpose purpose) {
        std::uint64_t key = mix64(master_seed);
        key = mix64(key ^ run_index);
        key = mix64(key ^ static_cast<std::uint64_t>(purpose));
        // Fill state from the splitmix64 sequence started at key.
        for (auto& word : state_) {
            key += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = key;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal draw (Box-Muller, cosine branch only).
    double next_normal() {
        double u1;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi_ * u2);
    }

    /// Gamma(shape, 1) draw for shape >= 1 (Marsaglia-Tsang squeeze).
    double next_gamma(double shape) {
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = next_normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_double();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static constexpr double pi_ = 3.14159265358979323846;
    std::uint64_t state_[4];
};

} // namespace tsh
