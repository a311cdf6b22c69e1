#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "zml/error.hpp"

namespace zml {

inline constexpr double kDefaultSieveLimit = 1e9;

using PrimeList = std::vector<std::uint64_t>;

namespace detail {

inline std::vector<std::uint32_t> small_primes(std::uint32_t n) {
    std::vector<char> composite(n + 1, 0);
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        out.push_back(i);
        for (std::uint64_t j = std::uint64_t(i) * i; j <= n; j += i) composite[j] = 1;
    }
    return out;
}

}  // namespace detail

/// All primes <= X by a segmented sieve of Eratosthenes over odd numbers.
inline PrimeList sieve_primes(double X, double limit = kDefaultSieveLimit) {
    if (!(X >= 2.0)) throw DomainError("sieve_primes: X must be at least 2");
    if (X > limit) throw CapacityError("sieve_primes: X = " + std::to_string(X) + " exceeds the configured limit");
    const auto n = static_cast<std::uint64_t>(std::floor(X));
    const auto root = static_cast<std::uint32_t>(std::sqrt(static_cast<double>(n))) + 1;
    const auto base = detail::small_primes(root);

    PrimeList out;
    out.reserve(static_cast<std::size_t>(1.2 * n / std::max(1.0, std::log(static_cast<double>(n)))) + 8);
    out.push_back(2);

    constexpr std::uint64_t kSegment = 1u << 18;  // odd numbers per segment
    std::vector<char> seg(kSegment);
    // segment covers odd numbers lo, lo+2, ..., lo + 2*(kSegment-1)
    for (std::uint64_t lo = 3; lo <= n; lo += 2 * kSegment) {
        const std::uint64_t hi = std::min<std::uint64_t>(n, lo + 2 * (kSegment - 1));
        const std::uint64_t count = (hi - lo) / 2 + 1;
        std::fill(seg.begin(), seg.begin() + static_cast<std::ptrdiff_t>(count), 0);
        for (std::size_t k = 1; k < base.size(); ++k) {
            const std::uint64_t p = base[k];
            if (p * p > hi) break;
            std::uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
            if (start % 2 == 0) start += p;
            for (std::uint64_t m = start; m <= hi; m += 2 * p) seg[(m - lo) / 2] = 1;
        }
        for (std::uint64_t i = 0; i < count; ++i)
            if (!seg[i]) out.push_back(lo + 2 * i);
    }
    return out;
}

/// von Mangoldt weights: Lambda(n) for n in [0, N], built from the prime list.
inline std::vector<double> von_mangoldt_table(std::uint64_t N) {
    std::vector<double> lam(N + 1, 0.0);
    if (N < 2) return lam;
    for (std::uint64_t p : sieve_primes(static_cast<double>(N))) {
        const double lp = std::log(static_cast<double>(p));
        for (std::uint64_t q = p; q <= N; q *= p) {
            lam[q] = lp;
            if (q > N / p) break;
        }
    }
    return lam;
}

}  // namespace zml
