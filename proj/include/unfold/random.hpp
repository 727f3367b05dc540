#pragma once

#include "unfold/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace unfold {

/// Seeded mt19937_64 with its own distributions; a seed gives the same stream
/// on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal (Box-Muller, both variates used).
    double normal();
    /// Uniform integer in [0, bound), unbiased.
    std::uint64_t below(std::uint64_t bound);
    /// m distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<Index> sample(Index n, Index m);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace unfold
