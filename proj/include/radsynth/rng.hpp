#pragma once

#include <cmath>
#include <cstdint>

namespace radsynth {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stateless counter hash: value n of the stream named by seed. Safe to call
// from any thread / any order, which keeps per-pixel noise deterministic
// under OpenMP.
inline std::uint64_t hash_at(std::uint64_t seed, std::uint64_t n) {
    std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (n + 1));
    return splitmix64(s);
}

inline double unit_double(std::uint64_t x) { return double(x >> 11) * 0x1.0p-53; }  // [0,1)

inline double gaussian_at(std::uint64_t seed, std::uint64_t n) {
    double u1 = (double(hash_at(seed, 2 * n) >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    double u2 = unit_double(hash_at(seed, 2 * n + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Sequential generator for parameter draws and annealing proposals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }
    double uniform() { return unit_double(next_u64()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + int(next_u64() % std::uint64_t(hi - lo + 1));
    }
    double gaussian() {
        double u1 = (double(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace radsynth
