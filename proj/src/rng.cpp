#include "agora/rng.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace agora {

std::vector<std::size_t> sample_indices(SplitMix64& rng, std::size_t n, std::size_t k) {
    if (k > n)
        throw Error(ErrorKind::Precondition,
                    "cannot sample " + std::to_string(k) + " from pool of " + std::to_string(n));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

std::vector<std::uint64_t> sample_subset_sorted(SplitMix64& rng, std::uint64_t n,
                                                std::uint64_t m) {
    if (m > n)
        throw Error(ErrorKind::Precondition,
                    "cannot sample " + std::to_string(m) + " from " + std::to_string(n));
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(static_cast<std::size_t>(m));
    for (std::uint64_t j = n - m; j < n; ++j) {
        std::uint64_t t = rng.next_below(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace agora
