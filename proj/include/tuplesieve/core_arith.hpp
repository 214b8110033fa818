#ifndef TUPLESIEVE_CORE_ARITH_HPP
#define TUPLESIEVE_CORE_ARITH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "budget.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "summation.hpp"

namespace tuplesieve {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
__extension__ using u128 = unsigned __int128;
using i64 = std::int64_t;

struct PrimePower {
    u64 prime;
    int exponent;
};

// ---------------------------------------------------------------------------
// Trial-division primitives. Independent of every table below; they serve as
// the fallback for arguments beyond a table and as the re-check path for
// witnesses.

inline bool is_prime_trial(u64 n)
{
    if (n < 2) {
        return false;
    }
    if (n % 2 == 0) {
        return n == 2;
    }
    for (u64 d = 3; d * d <= n; d += 2) {
        if (n % d == 0) {
            return false;
        }
    }
    return true;
}

// Deterministic Miller-Rabin for 64-bit n (bases 2..37 suffice).
inline bool is_prime_mr(u64 n)
{
    if (n < 2) {
        return false;
    }
    for (u64 p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
        if (n % p == 0) {
            return n == p;
        }
    }
    auto mulm = [n](u64 a, u64 b) { return static_cast<u64>(static_cast<u128>(a) * b % n); };
    auto powm = [&](u64 a, u64 e) {
        u64 r = 1;
        while (e) {
            if (e & 1) {
                r = mulm(r, a);
            }
            a = mulm(a, a);
            e >>= 1;
        }
        return r;
    };
    u64 d = n - 1;
    int s = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++s;
    }
    for (u64 a : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
        u64 x = powm(a, d);
        if (x == 1 || x == n - 1) {
            continue;
        }
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulm(x, x);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) {
            return false;
        }
    }
    return true;
}

inline std::vector<PrimePower> factorize_trial(u64 n)
{
    std::vector<PrimePower> out;
    if (n < 2) {
        return out;
    }
    auto take = [&](u64 p) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e > 0) {
            out.push_back({p, e});
        }
    };
    take(2);
    for (u64 p = 3; p * p <= n; p += 2) {
        take(p);
    }
    if (n > 1) {
        out.push_back({n, 1});
    }
    return out;
}

inline u64 divisor_count_trial(u64 n)
{
    u64 t = 1;
    for (const auto& pp : factorize_trial(n)) {
        t *= static_cast<u64>(pp.exponent + 1);
    }
    return t;
}

// Λ(n): log p when n = p^m, zero otherwise.
inline double von_mangoldt(u64 n)
{
    if (n < 2) {
        return 0.0;
    }
    const auto f = factorize_trial(n);
    return f.size() == 1 ? std::log(static_cast<double>(f.front().prime)) : 0.0;
}

// Λ_k(n) = Σ_{d|n} μ(d) (log(n/d))^k, summed over the squarefree divisors of
// n. Returns exactly zero when n has more than k distinct prime factors.
inline double generalized_von_mangoldt(u64 n, int k)
{
    if (k < 1) {
        throw InputError("generalized_von_mangoldt: k must be >= 1");
    }
    if (n < 2) {
        return 0.0;
    }
    const auto f = factorize_trial(n);
    const int omega = static_cast<int>(f.size());
    if (omega > k) {
        return 0.0;
    }
    const double log_n = std::log(static_cast<double>(n));
    CompensatedSum s;
    for (u32 mask = 0; mask < (1u << omega); ++mask) {
        double log_d = 0.0;
        int bits = 0;
        for (int i = 0; i < omega; ++i) {
            if (mask & (1u << i)) {
                log_d += std::log(static_cast<double>(f[static_cast<std::size_t>(i)].prime));
                ++bits;
            }
        }
        const double term = std::pow(log_n - log_d, k);
        s += (bits % 2 == 0) ? term : -term;
    }
    return s.value();
}

// ---------------------------------------------------------------------------
// Segmented sieve of Eratosthenes.

inline constexpr u64 kDefaultSegment = u64{1} << 20;

// Primes up to sqrt(limit), by a plain sieve.
inline std::vector<u32> small_primes(u64 limit)
{
    std::vector<u32> out;
    if (limit < 2) {
        return out;
    }
    std::vector<char> composite(limit + 1, 0);
    for (u64 i = 2; i <= limit; ++i) {
        if (composite[i]) {
            continue;
        }
        out.push_back(static_cast<u32>(i));
        for (u64 j = i * i; j <= limit; j += i) {
            composite[j] = 1;
        }
    }
    return out;
}

inline u64 isqrt(u64 n)
{
    u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) {
        --r;
    }
    while ((r + 1) * (r + 1) <= n) {
        ++r;
    }
    return r;
}

// Calls fn(p) for every prime p in [lo, hi] in increasing order, using
// odd-only segments of `segment` integers.
template <typename Fn>
void for_each_prime(u64 lo, u64 hi, Fn&& fn, u64 segment = kDefaultSegment)
{
    if (hi < 2 || lo > hi) {
        return;
    }
    lo = std::max<u64>(lo, 2);
    if (lo <= 2) {
        fn(u64{2});
        lo = 3;
    }
    if (lo % 2 == 0) {
        ++lo;
    }
    if (lo > hi) {
        return;
    }
    const auto base = small_primes(isqrt(hi));
    std::vector<char> seg;
    for (u64 seg_lo = lo; seg_lo <= hi; seg_lo += segment) {
        const u64 seg_hi = std::min(hi, seg_lo + segment - 1);
        // seg[i] <-> seg_lo + 2i, seg_lo odd.
        const u64 count = (seg_hi - seg_lo) / 2 + 1;
        seg.assign(count, 1);
        for (std::size_t bi = 1; bi < base.size(); ++bi) {
            const u64 p = base[bi];
            if (p * p > seg_hi) {
                break;
            }
            u64 start = std::max(p * p, ((seg_lo + p - 1) / p) * p);
            if (start % 2 == 0) {
                start += p;
            }
            for (u64 m = start; m <= seg_hi; m += 2 * p) {
                seg[(m - seg_lo) / 2] = 0;
            }
        }
        for (u64 i = 0; i < count; ++i) {
            if (seg[i]) {
                const u64 n = seg_lo + 2 * i;
                if (n > 1) {
                    fn(n);
                }
            }
        }
    }
}

// Primality bits plus the sorted prime list up to `limit`.
class PrimeTable {
public:
    PrimeTable() = default;

    u64 limit() const { return limit_; }
    std::span<const u32> primes() const { return primes_; }
    std::size_t count() const { return primes_.size(); }

    bool is_prime(u64 n) const
    {
        if (n > limit_) {
            throw InputError("PrimeTable::is_prime: argument beyond sieve limit");
        }
        return (bits_[n >> 6] >> (n & 63)) & 1u;
    }

    // Number of primes <= x (x <= limit).
    std::size_t pi(u64 x) const
    {
        return static_cast<std::size_t>(std::upper_bound(primes_.begin(), primes_.end(), x) - primes_.begin());
    }

    friend PrimeTable sieve_primes(u64 limit, u64 segment);

private:
    u64 limit_ = 0;
    std::vector<u64> bits_;
    std::vector<u32> primes_;
};

inline PrimeTable sieve_primes(u64 limit, u64 segment = kDefaultSegment)
{
    if (limit < 2) {
        throw InputError("sieve_primes: limit must be >= 2");
    }
    if (limit > 0xFFFFFFFFull) {
        throw InputError("sieve_primes: limit must fit in 32 bits");
    }
    const long double est_primes = 1.3L * static_cast<long double>(limit) / std::log(static_cast<long double>(limit));
    Budget::require_memory(static_cast<long double>(limit) / 8 + 4 * est_primes, "sieve_primes");

    PrimeTable t;
    t.limit_ = limit;
    t.bits_.assign(limit / 64 + 1, 0);

    // Segments are sieved independently; their prime lists are concatenated
    // in segment order.
    const u64 n_segments = (limit + segment) / segment;
    std::vector<std::vector<u32>> found(n_segments);
    parallel_for(n_segments, [&](std::size_t s) {
        const u64 lo = s * segment;
        const u64 hi = std::min(limit, lo + segment - 1);
        for_each_prime(lo, hi, [&](u64 p) { found[s].push_back(static_cast<u32>(p)); }, segment);
    });
    std::size_t total = 0;
    for (const auto& f : found) {
        total += f.size();
    }
    t.primes_.reserve(total);
    for (auto& f : found) {
        for (u32 p : f) {
            t.primes_.push_back(p);
            t.bits_[p >> 6] |= u64{1} << (p & 63);
        }
        std::vector<u32>().swap(f);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Möbius, Euler phi and smallest prime factor, by a linear sieve.

class MobiusTable {
public:
    MobiusTable() = default;

    u64 limit() const { return limit_; }
    int mu(u64 n) const { return mu_.at(n); }
    u32 phi(u64 n) const { return phi_.at(n); }
    u32 smallest_factor(u64 n) const { return spf_.at(n); }
    bool squarefree(u64 n) const { return mu(n) != 0; }

    std::vector<PrimePower> factor(u64 n) const
    {
        if (n > limit_) {
            return factorize_trial(n);
        }
        std::vector<PrimePower> out;
        while (n > 1) {
            const u64 p = spf_[n];
            int e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.push_back({p, e});
        }
        return out;
    }

    u64 divisor_count(u64 n) const
    {
        u64 t = 1;
        for (const auto& pp : factor(n)) {
            t *= static_cast<u64>(pp.exponent + 1);
        }
        return t;
    }

    friend MobiusTable sieve_mobius(u64 limit);

private:
    u64 limit_ = 0;
    std::vector<std::int8_t> mu_;
    std::vector<u32> phi_;
    std::vector<u32> spf_;
};

inline MobiusTable sieve_mobius(u64 limit)
{
    if (limit < 1) {
        throw InputError("sieve_mobius: limit must be >= 1");
    }
    if (limit > 0xFFFFFFFFull) {
        throw InputError("sieve_mobius: limit must fit in 32 bits");
    }
    Budget::require_memory(9.5L * static_cast<long double>(limit + 1), "sieve_mobius");

    MobiusTable t;
    t.limit_ = limit;
    t.mu_.assign(limit + 1, 0);
    t.phi_.assign(limit + 1, 0);
    t.spf_.assign(limit + 1, 0);
    std::vector<u32> primes;
    t.mu_[1] = 1;
    t.phi_[1] = 1;
    t.spf_[1] = 1;
    for (u64 i = 2; i <= limit; ++i) {
        if (t.spf_[i] == 0) {
            t.spf_[i] = static_cast<u32>(i);
            t.mu_[i] = -1;
            t.phi_[i] = static_cast<u32>(i - 1);
            primes.push_back(static_cast<u32>(i));
        }
        for (u32 p : primes) {
            const u64 m = i * p;
            if (p > t.spf_[i] || m > limit) {
                break;
            }
            t.spf_[m] = p;
            if (p == t.spf_[i]) {
                t.mu_[m] = 0;
                t.phi_[m] = t.phi_[i] * p;
            } else {
                t.mu_[m] = static_cast<std::int8_t>(-t.mu_[i]);
                t.phi_[m] = t.phi_[i] * (p - 1);
            }
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Tables of Λ and θ over [0, limit], and the Chebyshev functions.

inline std::vector<double> von_mangoldt_table(const PrimeTable& primes, u64 limit)
{
    if (limit > primes.limit()) {
        throw InputError("von_mangoldt_table: limit beyond prime table");
    }
    Budget::require_memory(8.0L * static_cast<long double>(limit + 1), "von_mangoldt_table");
    std::vector<double> out(limit + 1, 0.0);
    for (u32 p : primes.primes()) {
        if (p > limit) {
            break;
        }
        const double lp = std::log(static_cast<double>(p));
        for (u64 q = p; q <= limit; q *= p) {
            out[q] = lp;
            if (q > limit / p) {
                break;
            }
        }
    }
    return out;
}

inline std::vector<double> theta_table(const PrimeTable& primes, u64 limit)
{
    if (limit > primes.limit()) {
        throw InputError("theta_table: limit beyond prime table");
    }
    Budget::require_memory(8.0L * static_cast<long double>(limit + 1), "theta_table");
    std::vector<double> out(limit + 1, 0.0);
    for (u32 p : primes.primes()) {
        if (p > limit) {
            break;
        }
        out[p] = std::log(static_cast<double>(p));
    }
    return out;
}

// ψ(x) = Σ_{n<=x} Λ(n), as Σ_{p<=x} floor(log_p x) log p.
inline double chebyshev_psi(double x)
{
    if (x < 2) {
        return 0.0;
    }
    const u64 lim = static_cast<u64>(std::floor(x));
    CompensatedSum s;
    for_each_prime(2, lim, [&](u64 p) {
        const double lp = std::log(static_cast<double>(p));
        for (u64 q = p; q <= lim; q *= p) {
            s += lp;
            if (q > lim / p) {
                break;
            }
        }
    });
    return s.value();
}

// θ(x) = Σ_{p<=x} log p.
inline double chebyshev_theta(double x)
{
    if (x < 2) {
        return 0.0;
    }
    CompensatedSum s;
    for_each_prime(2, static_cast<u64>(std::floor(x)), [&](u64 p) { s += std::log(static_cast<double>(p)); });
    return s.value();
}

} // namespace tuplesieve

#endif // TUPLESIEVE_CORE_ARITH_HPP
