#pragma once

#include <cstdint>
#include <random>

namespace boxtrack {

/// Portable seeded generator. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard. The standard distributions are
/// implementation-defined, so the variates are derived here from raw engine
/// output with fixed algorithms:
///   uniform  53 high bits scaled to [0, 1)
///   normal   Box-Muller, cosine branch only, one normal per two uniforms
///   poisson  Knuth's product of uniforms, in chunks of mean <= 30
/// Identical seeds therefore reproduce identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal(double mean = 0.0, double stddev = 1.0);
    bool bernoulli(double p) { return uniform() < p; }
    std::uint64_t poisson(double mean);
    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi);

private:
    std::mt19937_64 engine_;
};

}  // namespace boxtrack
