#pragma once

#include <cstdint>
#include <random>

namespace rba {

// splitmix64 mixer; used both for seed derivation and hashing trial indices.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derived seed for trial `index` of a run seeded with `base`.  Trials can be
// partitioned across workers in any order and still reproduce exactly.
inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(base ^ mix64(index + 1));
}

// Deterministic uniform generator.  mt19937_64's output sequence is fixed by
// the standard; the [0,1) conversion below avoids std::uniform_real_distribution,
// whose mapping is implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t bits() { return engine_(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace rba
