#pragma once

#include <cstdint>
#include <vector>

#include "agora/errors.hpp"

namespace agora {

// splitmix64 (Steele/Lea/Vigna). Chosen because the whole generator state is
// a single u64 (trivial to checkpoint) and the algorithm is short enough to
// re-implement independently; docs/determinism.md records the exact recipe
// every sampler below follows.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform-ish draw in [0, bound) via modulo reduction. The slight modulo
    // bias is irrelevant next to cross-implementation reproducibility, which
    // is the contract here.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) throw Error(ErrorKind::Precondition, "next_below(0)");
        return next() % bound;
    }

    // Uniform double in [0, 1) using the top 53 bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t state() const noexcept { return state_; }
    void set_state(std::uint64_t state) noexcept { state_ = state; }

private:
    std::uint64_t state_;
};

// k distinct indices from [0, n), sampled without replacement by a partial
// Fisher-Yates shuffle. Deterministic for a fixed rng state.
std::vector<std::size_t> sample_indices(SplitMix64& rng, std::size_t n, std::size_t k);

// m distinct values from [0, n) by Robert Floyd's subset sampling, returned
// sorted ascending. O(m) memory, suitable for huge n (e.g. pair counts).
std::vector<std::uint64_t> sample_subset_sorted(SplitMix64& rng, std::uint64_t n,
                                                std::uint64_t m);

}  // namespace agora
