#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

namespace recert {

// C(n, k) saturating at 2^63-1.
inline std::uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    long double r = 1.0L;
    for (std::size_t i = 1; i <= k; ++i) {
        r *= static_cast<long double>(n - k + i);
        r /= static_cast<long double>(i);
        if (r > 9.2e18L) return UINT64_C(0x7fffffffffffffff);
    }
    return static_cast<std::uint64_t>(r + 0.5L);
}

inline std::vector<int> first_combination(std::size_t k) {
    std::vector<int> c(k);
    std::iota(c.begin(), c.end(), 0);
    return c;
}

// Advances to the next lexicographic k-subset of {0..n-1}; false when done.
inline bool next_combination(std::vector<int>& c, std::size_t n) {
    const std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < static_cast<int>(n - k + i)) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace recert
