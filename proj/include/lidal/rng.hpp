#pragma once

#include <cmath>
#include <cstdint>

namespace lidal {

/// xoshiro256++ with splitmix64 seeding. Hand-rolled so that every draw is
/// bit-reproducible across platforms and standard-library versions; the
/// simulator's determinism guarantees rest on this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
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

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        return n == 0 ? 0 : next_u64() % n;
    }

    /// Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = kTwoPi_ * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    /// Derives an independent child stream. Children of the same parent with
    /// distinct tags never collide in practice.
    Rng stream(std::uint64_t tag) const {
        std::uint64_t x = state_[0] ^ (state_[2] + 0x9e3779b97f4a7c15ULL * (tag + 1));
        Rng child(0);
        for (auto& word : child.state_) word = splitmix64(x);
        child.has_cached_ = false;
        return child;
    }

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
        std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
        return splitmix64(x);
    }

private:
    static constexpr double kTwoPi_ = 6.28318530717958647692;

    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4] = {};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace lidal
