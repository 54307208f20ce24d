// Deterministic random sampling. The double stream is derived from the raw
// mt19937_64 output directly so that identical seeds give identical samples
// on every platform, independent of the standard library's distribution
// implementations.
#pragma once

#include <cstdint>
#include <random>

namespace stackel {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1) with 53 random mantissa bits.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace stackel
