#include "unfold/random.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace unfold {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    do {
        u = uniform();
    } while (u <= 0.0);
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 2.0 * std::numbers::pi * v;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw InvalidArgument("empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = 0;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

std::vector<Index> Rng::sample(Index n, Index m) {
    if (m < 0 || m > n) throw InvalidArgument("sample size must lie in [0, n]");
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < m; ++i) {
        const auto j = i + static_cast<Index>(below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(m));
    return pool;
}

}  // namespace unfold
