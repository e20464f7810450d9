#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cspqaoa/common.hpp"

namespace cspqaoa {

/// SplitMix64 finalizer, used to derive independent stream seeds from a base
/// seed (per trial, per probe, per worker) so results never depend on how work
/// is partitioned.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic generator: the engine is std::mt19937_64 (bit-exact sequence
/// fixed by the standard) and all distributions are implemented here rather
/// than delegated to the standard library, whose distribution algorithms are
/// implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(mix_seed(seed, 0)) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound), unbiased via mask rejection.
    uint64_t next_below(uint64_t bound) {
        if (bound == 0) throw Error("Rng::next_below: zero bound");
        uint64_t mask = ~uint64_t{0} >> std::countl_zero((bound - 1) | 1);
        for (;;) {
            uint64_t v = engine_() & mask;
            if (v < bound) return v;
        }
    }

    /// Poisson draw. Means above 32 are decomposed into independent chunks of
    /// mean <= 32 (exact by Poisson additivity); each chunk uses bottom-up CDF
    /// inversion, which is safe because exp(-32) is far from underflow.
    int64_t next_poisson(double mean) {
        if (!(mean >= 0.0)) throw Error("Rng::next_poisson: mean must be >= 0");
        if (mean == 0.0) return 0;
        int64_t chunks = static_cast<int64_t>(std::ceil(mean / 32.0));
        double chunk_mean = mean / static_cast<double>(chunks);
        int64_t total = 0;
        for (int64_t c = 0; c < chunks; ++c) total += poisson_inversion(chunk_mean);
        return total;
    }

    /// Uniform ordered sample of k distinct elements of [0, n) via partial
    /// Fisher-Yates; every ordered k-tuple without repeats is equally likely.
    std::vector<uint32_t> next_subset(uint32_t n, uint32_t k) {
        if (k > n) throw Error("Rng::next_subset: k > n");
        std::vector<uint32_t> pool(n);
        for (uint32_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<uint32_t> out(k);
        for (uint32_t i = 0; i < k; ++i) {
            uint64_t j = i + next_below(n - i);
            std::swap(pool[i], pool[j]);
            out[i] = pool[i];
        }
        return out;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[next_below(i)]);
    }

private:
    int64_t poisson_inversion(double mean) {
        double p = std::exp(-mean);
        double cdf = p;
        double u = next_unit();
        int64_t k = 0;
        while (u > cdf && k < 4096) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    std::mt19937_64 engine_;
};

}  // namespace cspqaoa
