#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ccx::detail {

// Portable draws on top of mt19937_64. std:: distributions are not
// implementation-stable across library versions, these helpers are.
struct Rng {
    std::mt19937_64 gen;

    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double real01() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

    std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive
        return lo + static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    bool chance(double p) { return real01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1],
                      v[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(i) - 1))]);
    }
};

}  // namespace ccx::detail
