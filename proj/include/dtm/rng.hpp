#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace dtm {

// Seeded random stream. Wraps mt19937_64 but keeps all derived draws
// (bounded ints, unit doubles, shuffles) under our control so that outputs
// are reproducible across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0,1), 53 bits of mantissa.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n), rejection sampled.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0)
            throw std::invalid_argument("Rng::below: empty range");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        if (hi < lo)
            throw std::invalid_argument("Rng::uniform_int: bad range");
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi) - lo + 1));
    }

    // First k entries of a Fisher-Yates pass over [0, n).
    std::vector<int> sample_without_replacement(int n, int k) {
        if (k > n)
            throw std::invalid_argument("sample_without_replacement: k > n");
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i)
            pool[i] = i;
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

    // Independent child seed; used to give benchmark iterations their own streams.
    std::uint64_t fork_seed() { return next_u64(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace dtm
