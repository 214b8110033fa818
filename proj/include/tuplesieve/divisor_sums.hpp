#ifndef TUPLESIEVE_DIVISOR_SUMS_HPP
#define TUPLESIEVE_DIVISOR_SUMS_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "core_arith.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "summation.hpp"
#include "tuples.hpp"

namespace tuplesieve {

// a*n + b. A tuple H is the family {n + h : h in H}.
struct LinearForm {
    i64 a = 1;
    i64 b = 0;
    friend bool operator==(const LinearForm&, const LinearForm&) = default;
};

inline std::vector<LinearForm> forms_of(const Tuple& H)
{
    std::vector<LinearForm> f;
    for (i64 h : H.offsets()) {
        f.push_back({1, h});
    }
    return f;
}

inline u64 mul_mod(u64 a, u64 b, u64 m)
{
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 inverse_mod(u64 a, u64 m)
{
    i64 t = 0, new_t = 1;
    i64 r = static_cast<i64>(m), new_r = static_cast<i64>(a % m);
    while (new_r != 0) {
        const i64 q = r / new_r;
        t = std::exchange(new_t, t - q * new_t);
        r = std::exchange(new_r, r - q * new_r);
    }
    if (r != 1) {
        throw InputError("inverse_mod: not invertible");
    }
    return static_cast<u64>(mod_floor(t, static_cast<i64>(m)));
}

// Residues n mod p with p | Π (a_i n + b_i), sorted.
inline std::vector<u64> prime_roots(std::span<const LinearForm> forms, u64 p)
{
    std::vector<u64> roots;
    const i64 pi = static_cast<i64>(p);
    for (const auto& f : forms) {
        const i64 a = mod_floor(f.a, pi);
        const i64 b = mod_floor(f.b, pi);
        if (a == 0) {
            if (b == 0) {
                roots.resize(p);
                for (u64 r = 0; r < p; ++r) {
                    roots[r] = r;
                }
                return roots;
            }
            continue;
        }
        roots.push_back(mul_mod(static_cast<u64>(mod_floor(-b, pi)), inverse_mod(static_cast<u64>(a), p), p));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

// Residues r mod d (d squarefree) with d | P_H(r).
struct RootSystem {
    u64 d = 1;
    std::vector<u64> roots;
};

namespace detail {

// {x mod d*p : x ≡ r (mod d) for r in rd, x ≡ s (mod p) for s in rp}.
inline void crt_combine(std::span<const u64> rd, u64 d, std::span<const u64> rp, u64 p, std::vector<u64>& out)
{
    out.clear();
    const u64 inv = inverse_mod(d % p, p);
    for (u64 r : rd) {
        const u64 rmod = r % p;
        for (u64 s : rp) {
            const u64 t = mul_mod((s + p - rmod) % p, inv, p);
            out.push_back(r + d * t);
        }
    }
}

} // namespace detail

inline RootSystem root_classes(u64 d, std::span<const LinearForm> forms)
{
    if (d < 1) {
        throw InputError("root_classes: d must be >= 1");
    }
    RootSystem out;
    out.d = d;
    out.roots = {0};
    u64 cur = 1;
    std::vector<u64> next;
    for (const auto& pp : factorize_trial(d)) {
        if (pp.exponent > 1) {
            throw InputError("root_classes: d must be squarefree");
        }
        const auto rp = prime_roots(forms, pp.prime);
        detail::crt_combine(out.roots, cur, rp, pp.prime, next);
        out.roots.swap(next);
        cur *= pp.prime;
    }
    std::sort(out.roots.begin(), out.roots.end());
    return out;
}

inline RootSystem root_classes(u64 d, const Tuple& H)
{
    const auto f = forms_of(H);
    return root_classes(d, f);
}

// Enumerates every squarefree d <= R together with μ(d) and the roots of
// d | Π(n), depth-first in increasing prime order. Divisors with no roots
// are skipped since they never divide Π(n).
class DivisorEnumerator {
public:
    DivisorEnumerator(std::vector<LinearForm> forms, double R) : forms_(std::move(forms))
    {
        if (!(R >= 1)) {
            throw InputError("truncation level R must be >= 1");
        }
        r_int_ = static_cast<u64>(std::floor(R));
        Budget::require_memory(16.0L * static_cast<long double>(r_int_), "divisor enumeration");
        for (u32 p : small_primes(r_int_)) {
            auto roots = prime_roots(forms_, p);
            if (!roots.empty()) {
                primes_.push_back(p);
                roots_.push_back(std::move(roots));
            }
        }
    }

    u64 r_int() const { return r_int_; }

    // fn(d, mu, roots) for every admissible squarefree d <= R.
    template <typename Fn>
    void for_each(Fn&& fn) const
    {
        std::vector<std::vector<u64>> stack(24);
        stack[0] = {0};
        fn(u64{1}, 1, std::span<const u64>(stack[0]));
        recurse(fn, stack, 0, 1, 1, 0);
    }

private:
    template <typename Fn>
    void recurse(Fn& fn, std::vector<std::vector<u64>>& stack, std::size_t depth, u64 d, int mu,
                 std::size_t first) const
    {
        for (std::size_t j = first; j < primes_.size(); ++j) {
            const u64 p = primes_[j];
            if (d > r_int_ / p) {
                break;
            }
            const u64 dp = d * p;
            detail::crt_combine(stack[depth], d, roots_[j], p, stack[depth + 1]);
            fn(dp, -mu, std::span<const u64>(stack[depth + 1]));
            recurse(fn, stack, depth + 1, dp, -mu, j + 1);
        }
    }

    std::vector<LinearForm> forms_;
    u64 r_int_ = 1;
    std::vector<u64> primes_;
    std::vector<std::vector<u64>> roots_;
};

// values[n - start - 1] = Σ_{d | Π(n), d <= R} coeff(d, μ(d)) for n in (start, end].
// Each n receives its terms in enumeration order, whatever the chunking.
template <typename Coeff>
std::vector<double> divisor_sum_interval(std::span<const LinearForm> forms, double R, i64 start, i64 end,
                                         Coeff&& coeff)
{
    if (end <= start) {
        throw InputError("interval (start, end] must be nonempty");
    }
    const i64 len = end - start;
    Budget::require_memory(8.0L * static_cast<long double>(len), "weight table");
    std::vector<double> values(static_cast<std::size_t>(len), 0.0);
    const DivisorEnumerator en(std::vector<LinearForm>(forms.begin(), forms.end()), R);
    const i64 chunk_len =
        std::max<i64>(kDefaultChunk, std::min<i64>(i64{1} << 22, 8 * static_cast<i64>(en.r_int())));
    const auto chunks = make_chunks(start, end, chunk_len);
    parallel_for(chunks.size(), [&](std::size_t c) {
        const i64 lo = chunks[c].lo;
        const i64 hi = chunks[c].hi;
        double* base = values.data() + (lo - start);
        en.for_each([&](u64 d, int mu, std::span<const u64> roots) {
            const double cd = coeff(d, mu);
            if (cd == 0.0) {
                return;
            }
            const i64 di = static_cast<i64>(d);
            for (u64 r : roots) {
                i64 n = lo + 1 + mod_floor(static_cast<i64>(r) - (lo + 1), di);
                for (; n <= hi; n += di) {
                    base[n - lo - 1] += cd;
                }
            }
        });
    });
    return values;
}

enum class WeightKind { lambda_R, lambda_lower_R, gpy, selberg, moment };

inline const char* kind_name(WeightKind k)
{
    switch (k) {
    case WeightKind::lambda_R: return "lambda_R";
    case WeightKind::lambda_lower_R: return "lambda_lower_R";
    case WeightKind::gpy: return "gpy";
    case WeightKind::selberg: return "selberg";
    case WeightKind::moment: return "moment";
    }
    return "unknown";
}

// Weights over n in (start, end].
struct WeightTable {
    i64 start = 0;
    i64 end = 0;
    double R = 1.0;
    WeightKind kind = WeightKind::lambda_R;
    std::optional<Tuple> tuple;
    int ell = 0;
    std::optional<i64> restriction; // coprimality cutoff w
    int moment_k = 0;
    i64 window = 0;
    std::vector<double> values;
    std::vector<std::string> warnings;

    std::size_t size() const { return values.size(); }
    double at(i64 n) const
    {
        if (n <= start || n > end) {
            throw InputError("WeightTable::at: n outside (start, end]");
        }
        return values[static_cast<std::size_t>(n - start - 1)];
    }
};

namespace detail {

inline void check_interval(i64 start, i64 end, double R)
{
    if (end <= start) {
        throw InputError("interval (start, end] must be nonempty");
    }
    if (!(R >= 1)) {
        throw InputError("R must be >= 1");
    }
}

inline void warn_vacuous(WeightTable& t)
{
    if (t.R > static_cast<double>(t.end)) {
        t.warnings.push_back("R exceeds the interval end; truncation is vacuous there");
    }
}

} // namespace detail

// Λ_R(n) = Σ_{d|n, d<=R} μ(d) log(R/d).
inline WeightTable lambda_R_interval(i64 start, i64 end, double R)
{
    detail::check_interval(start, end, R);
    WeightTable t;
    t.start = start;
    t.end = end;
    t.R = R;
    t.kind = WeightKind::lambda_R;
    const double log_r = std::log(R);
    const LinearForm f[] = {{1, 0}};
    t.values = divisor_sum_interval(f, R, start, end, [&](u64 d, int mu) {
        return mu * (log_r - std::log(static_cast<double>(d)));
    });
    detail::warn_vacuous(t);
    return t;
}

// λ_R(n) = Σ_{r<=R} μ²(r)/φ(r) Σ_{d|(r,n)} d μ(d). Swapping the sums gives a
// divisor sum over d | n, d <= R, with coefficient μ(d) d Σ_{r<=R, d|r} μ²(r)/φ(r).
inline WeightTable lambda_lower_R_interval(i64 start, i64 end, double R)
{
    detail::check_interval(start, end, R);
    WeightTable t;
    t.start = start;
    t.end = end;
    t.R = R;
    t.kind = WeightKind::lambda_lower_R;
    const u64 r_int = static_cast<u64>(std::floor(R));
    const auto mob = sieve_mobius(std::max<u64>(r_int, 1));
    std::vector<double> inner(r_int + 1, 0.0);
    for (u64 d = 1; d <= r_int; ++d) {
        if (!mob.squarefree(d)) {
            continue;
        }
        CompensatedSum s;
        for (u64 r = d; r <= r_int; r += d) {
            if (mob.squarefree(r)) {
                s += 1.0 / mob.phi(r);
            }
        }
        inner[d] = s.value();
    }
    const LinearForm f[] = {{1, 0}};
    t.values = divisor_sum_interval(f, R, start, end, [&](u64 d, int mu) {
        return mu * static_cast<double>(d) * inner[d];
    });
    detail::warn_vacuous(t);
    return t;
}

inline constexpr int kMaxGpyExponent = 150;

// Zeroes every n for which some prime p <= w divides Π(n).
inline void apply_coprimality_restriction(WeightTable& t, std::span<const LinearForm> forms, i64 w)
{
    t.restriction = w;
    if (w < 2) {
        return;
    }
    for (u32 p : small_primes(static_cast<u64>(w))) {
        const i64 pi = p;
        for (u64 r : prime_roots(forms, p)) {
            for (i64 n = t.start + 1 + mod_floor(static_cast<i64>(r) - (t.start + 1), pi); n <= t.end; n += pi) {
                t.values[static_cast<std::size_t>(n - t.start - 1)] = 0.0;
            }
        }
    }
}

// Λ_R(n; H, ℓ) = 1/(k+ℓ)! Σ_{d | P_H(n), d<=R} μ(d) (log(R/d))^{k+ℓ}.
inline WeightTable gpy_weight_interval(const Tuple& H, int ell, i64 start, i64 end, double R,
                                       std::optional<i64> restriction = std::nullopt)
{
    detail::check_interval(start, end, R);
    if (ell < 0 || ell > H.k()) {
        throw InputError("gpy_weight: ell must be in [0, k]");
    }
    const int e = H.k() + ell;
    if (e > kMaxGpyExponent) {
        throw InputError("gpy_weight: k + ell exceeds " + std::to_string(kMaxGpyExponent));
    }
    WeightTable t;
    t.start = start;
    t.end = end;
    t.R = R;
    t.kind = WeightKind::gpy;
    t.tuple = H;
    t.ell = ell;
    const double log_r = std::log(R);
    const double log_fact = std::lgamma(e + 1.0);
    const auto forms = forms_of(H);
    t.values = divisor_sum_interval(forms, R, start, end, [&](u64 d, int mu) {
        const double L = log_r - std::log(static_cast<double>(d));
        if (L <= 0) {
            return 0.0;
        }
        return mu * std::exp(e * std::log(L) - log_fact);
    });
    if (restriction) {
        apply_coprimality_restriction(t, forms, *restriction);
    }
    detail::warn_vacuous(t);
    return t;
}

// Σ_{d | Π(n), d<=R} λ_d with λ_d = μ(d) (log(R/d)/log R)^{k+1}, k = number of forms.
inline std::vector<double> selberg_weights(std::span<const LinearForm> forms, i64 start, i64 end, double R)
{
    if (!(R >= 2)) {
        throw InputError("selberg_weight: R must be >= 2");
    }
    const double log_r = std::log(R);
    const int e = static_cast<int>(forms.size()) + 1;
    return divisor_sum_interval(forms, R, start, end, [&](u64 d, int mu) {
        const double x = 1.0 - std::log(static_cast<double>(d)) / log_r;
        if (x <= 0) {
            return 0.0;
        }
        return mu * std::pow(x, e);
    });
}

inline WeightTable selberg_weight_interval(const Tuple& H, i64 start, i64 end, double R)
{
    detail::check_interval(start, end, R);
    WeightTable t;
    t.start = start;
    t.end = end;
    t.R = R;
    t.kind = WeightKind::selberg;
    t.tuple = H;
    t.ell = 1;
    const auto forms = forms_of(H);
    t.values = selberg_weights(forms, start, end, R);
    detail::warn_vacuous(t);
    return t;
}

// Stirling numbers of the second kind S(k, j) for k <= 3.
inline double stirling2(int k, int j)
{
    if (j == k) {
        return 1.0;
    }
    if (j == 0 || j > k) {
        return 0.0;
    }
    if (j == 1) {
        return 1.0;
    }
    return 3.0; // S(3,2)
}

// ψ_R^{(k)}(n,h) = Σ_{H in [1,h]^k} (log R)^{k-|set H|} Π_{h in set H} Λ_R(n+h).
// Grouping vectors by their set of components: a j-set arises from
// j! S(k,j) vectors, and Σ over j-subsets of the products is the elementary
// symmetric polynomial e_j of the window Λ_R(n+1..n+h).
inline WeightTable moment_weight_interval(int k, i64 h, i64 start, i64 end, double R)
{
    if (k < 1 || k > 3) {
        throw InputError("moment_weight: k must be in [1, 3]");
    }
    if (h < 1) {
        throw InputError("moment_weight: h must be >= 1");
    }
    detail::check_interval(start, end, R);
    const auto base = lambda_R_interval(start, end + h, R);
    const double log_r = std::log(R);
    double coef[4] = {0, 0, 0, 0};
    for (int j = 1; j <= k; ++j) {
        coef[j] = std::tgamma(j + 1.0) * stirling2(k, j) * std::pow(log_r, k - j);
    }
    WeightTable t;
    t.start = start;
    t.end = end;
    t.R = R;
    t.kind = WeightKind::moment;
    t.moment_k = k;
    t.window = h;
    t.values.assign(static_cast<std::size_t>(end - start), 0.0);
    const auto chunks = make_chunks(start, end, kDefaultChunk);
    parallel_for(chunks.size(), [&](std::size_t c) {
        for (i64 n = chunks[c].lo + 1; n <= chunks[c].hi; ++n) {
            double es[4] = {1, 0, 0, 0};
            for (i64 m = n + 1; m <= n + h; ++m) {
                const double x = base.values[static_cast<std::size_t>(m - start - 1)];
                for (int j = k; j >= 1; --j) {
                    es[j] += es[j - 1] * x;
                }
            }
            double v = 0;
            for (int j = 1; j <= k; ++j) {
                v += coef[j] * es[j];
            }
            t.values[static_cast<std::size_t>(n - start - 1)] = v;
        }
    });
    return t;
}

// ---------------------------------------------------------------------------
// Export. CSV: header "n,value", one row per n, values with 17 significant
// digits. Binary (little-endian):
//   char[4] "TSWT" | u32 version (=1) | i64 start | i64 end | f64 R |
//   u32 kind tag (WeightKind order) | f64 values[end - start]

inline void write_csv(std::ostream& os, const WeightTable& t)
{
    os << "n,value\n";
    char buf[64];
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", t.values[i]);
        os << (t.start + 1 + static_cast<i64>(i)) << ',' << buf << '\n';
    }
}

inline constexpr char kBinaryMagic[4] = {'T', 'S', 'W', 'T'};
inline constexpr u32 kBinaryVersion = 1;

namespace detail {

template <typename T>
void put_le(std::ostream& os, T v)
{
    using U = std::conditional_t<sizeof(T) == 8, u64, u32>;
    U bits = std::bit_cast<U>(v);
    unsigned char b[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        b[i] = static_cast<unsigned char>(bits >> (8 * i));
    }
    os.write(reinterpret_cast<const char*>(b), sizeof b);
}

template <typename T>
T get_le(std::istream& is)
{
    using U = std::conditional_t<sizeof(T) == 8, u64, u32>;
    unsigned char b[sizeof(U)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof b)) {
        throw InputError("weight table: truncated binary stream");
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bits |= static_cast<U>(b[i]) << (8 * i);
    }
    return std::bit_cast<T>(bits);
}

} // namespace detail

inline void write_binary(std::ostream& os, const WeightTable& t)
{
    os.write(kBinaryMagic, 4);
    detail::put_le(os, kBinaryVersion);
    detail::put_le(os, t.start);
    detail::put_le(os, t.end);
    detail::put_le(os, t.R);
    detail::put_le(os, static_cast<u32>(t.kind));
    for (double v : t.values) {
        detail::put_le(os, v);
    }
}

// Reads the header and values; tuple/ell metadata is not part of the format.
inline WeightTable read_binary(std::istream& is)
{
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kBinaryMagic, 4) != 0) {
        throw InputError("weight table: bad magic");
    }
    if (detail::get_le<u32>(is) != kBinaryVersion) {
        throw InputError("weight table: unsupported version");
    }
    WeightTable t;
    t.start = detail::get_le<i64>(is);
    t.end = detail::get_le<i64>(is);
    t.R = detail::get_le<double>(is);
    const u32 kind = detail::get_le<u32>(is);
    if (kind > static_cast<u32>(WeightKind::moment) || t.end <= t.start) {
        throw InputError("weight table: bad header");
    }
    t.kind = static_cast<WeightKind>(kind);
    t.values.resize(static_cast<std::size_t>(t.end - t.start));
    for (auto& v : t.values) {
        v = detail::get_le<double>(is);
    }
    return t;
}

} // namespace tuplesieve

#endif // TUPLESIEVE_DIVISOR_SUMS_HPP
