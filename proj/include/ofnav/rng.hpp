#pragma once

#include <cmath>
#include <cstdint>

namespace ofnav {

// Counter-free splitmix64 step. All sampling in the simulator goes through
// this generator rather than <random>: the standard distributions are
// implementation-defined, and experiment outputs must be reproducible
// byte-for-byte across toolchains.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and a stream tag.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (tag * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    return splitmix64(s);
}

class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {
        // decorrelate trivially related seeds (0, 1, 2, ...)
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller; pairs are cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        spare_ = mag * std::sin(ang);
        has_spare_ = true;
        return mag * std::cos(ang);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Lattice hash for procedural noise, defined on 64-bit integer coordinates.
inline std::uint64_t lattice_hash(std::int64_t x, std::int64_t y, std::uint64_t seed) {
    std::uint64_t h = seed;
    h ^= static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ULL;
    h = (h ^ (h >> 29)) * 0xBF58476D1CE4E5B9ULL;
    h ^= static_cast<std::uint64_t>(y) * 0xC2B2AE3D27D4EB4FULL;
    h = (h ^ (h >> 32)) * 0x94D049BB133111EBULL;
    return h ^ (h >> 29);
}

// Hashed lattice value in [-1, 1].
inline double lattice_value(std::int64_t x, std::int64_t y, std::uint64_t seed) {
    return static_cast<double>(lattice_hash(x, y, seed) >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace ofnav
