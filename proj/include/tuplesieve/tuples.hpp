#ifndef TUPLESIEVE_TUPLES_HPP
#define TUPLESIEVE_TUPLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "core_arith.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "summation.hpp"

namespace tuplesieve {

// A set of distinct integer offsets h_1 < ... < h_k.
class Tuple {
public:
    Tuple() : offsets_{0} {}

    explicit Tuple(std::vector<i64> offsets) : offsets_(std::move(offsets))
    {
        if (offsets_.empty()) {
            throw InputError("Tuple: at least one offset required");
        }
        std::sort(offsets_.begin(), offsets_.end());
        if (std::adjacent_find(offsets_.begin(), offsets_.end()) != offsets_.end()) {
            throw InputError("Tuple: offsets must be distinct");
        }
    }

    Tuple(std::initializer_list<i64> offsets) : Tuple(std::vector<i64>(offsets)) {}

    // Comma-separated offsets, e.g. "0,4,6,10,12,16".
    static Tuple parse(std::string_view text)
    {
        std::vector<i64> v;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t comma = std::min(text.find(',', pos), text.size());
            std::string item(text.substr(pos, comma - pos));
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t") + 1);
            if (item.empty()) {
                throw InputError("Tuple: empty offset in '" + std::string(text) + "'");
            }
            std::size_t used = 0;
            long long val = 0;
            try {
                val = std::stoll(item, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != item.size()) {
                throw InputError("Tuple: bad offset '" + item + "'");
            }
            v.push_back(val);
            pos = comma + 1;
        }
        return Tuple(std::move(v));
    }

    std::span<const i64> offsets() const { return offsets_; }
    std::size_t size() const { return offsets_.size(); }
    int k() const { return static_cast<int>(offsets_.size()); }
    i64 diameter() const { return offsets_.back() - offsets_.front(); }
    bool contains(i64 h) const { return std::binary_search(offsets_.begin(), offsets_.end(), h); }

    Tuple shifted(i64 c) const
    {
        std::vector<i64> v(offsets_);
        for (auto& h : v) {
            h += c;
        }
        return Tuple(std::move(v));
    }

    std::string to_string() const
    {
        std::string s;
        for (std::size_t i = 0; i < offsets_.size(); ++i) {
            if (i) {
                s += ',';
            }
            s += std::to_string(offsets_[i]);
        }
        return s;
    }

    friend bool operator==(const Tuple&, const Tuple&) = default;

private:
    std::vector<i64> offsets_;
};

inline void to_json(nlohmann::json& j, const Tuple& t)
{
    j = std::vector<i64>(t.offsets().begin(), t.offsets().end());
}

inline void from_json(const nlohmann::json& j, Tuple& t)
{
    t = Tuple(j.get<std::vector<i64>>());
}

inline i64 mod_floor(i64 a, i64 m)
{
    const i64 r = a % m;
    return r < 0 ? r + m : r;
}

// ν_p(H): number of distinct residues of H modulo p.
inline int residue_count(const Tuple& H, u64 p)
{
    if (p < 2) {
        throw InputError("residue_count: p must be prime");
    }
    if (static_cast<i64>(p) > H.diameter()) {
        return H.k();
    }
    std::vector<char> seen(p, 0);
    int count = 0;
    for (i64 h : H.offsets()) {
        auto& s = seen[static_cast<std::size_t>(mod_floor(h, static_cast<i64>(p)))];
        if (!s) {
            s = 1;
            ++count;
        }
    }
    return count;
}

// Only primes p <= k can have all residue classes occupied.
inline bool is_admissible(const Tuple& H)
{
    for (u32 p : small_primes(static_cast<u64>(H.k()))) {
        if (residue_count(H, p) == static_cast<int>(p)) {
            return false;
        }
    }
    return true;
}

struct SingularSeriesValue {
    double value = 0.0;
    double truncation_bound = 0.0; // certified |value - 𝔖(H)|
    u64 cutoff_prime = 0;          // factors for p <= cutoff are exact
};

inline void to_json(nlohmann::json& j, const SingularSeriesValue& v)
{
    j = {{"value", v.value}, {"truncation_bound", v.truncation_bound}, {"cutoff_prime", v.cutoff_prime}};
}

// Largest Euler-product cutoff we are willing to stream primes up to.
inline constexpr u64 kMaxSingularSeriesCutoff = u64{1} << 32;

namespace detail {

// log((1 - k/p)(1 - 1/p)^{-k}), valid for p > k.
inline double generic_log_factor(int k, double p)
{
    return std::log1p(-static_cast<double>(k) / p) - k * std::log1p(-1.0 / p);
}

// Upper bound for Σ_{p > cutoff} |log factor| when every such prime has
// ν_p = k. Each |log factor| <= k((k-1)p + k) / (2 p^2 (p-k)) <= c/(p-k)^2,
// and the sum over odd integers is compared with an integral.
inline double tail_log_bound(int k, u64 cutoff)
{
    if (k <= 1) {
        return 0.0;
    }
    const double P = static_cast<double>(cutoff);
    const double c = 0.5 * k * (k - 1 + k / P);
    return c / (2.0 * (P - 1.0 - k));
}

inline u64 base_cutoff(const Tuple& H)
{
    const u64 k = static_cast<u64>(H.k());
    return std::max<u64>({static_cast<u64>(H.diameter()), k * k, 100, 2 * k + 2});
}

} // namespace detail

// Computes 𝔖(H) for many tuples sharing k and a maximal diameter: the factors
// for primes above the split point depend only on k, so their log-sum is
// accumulated once.
class SingularSeriesEngine {
public:
    SingularSeriesEngine(int k, i64 max_diameter, double tol, double head_bound = 0.0)
        : k_(k)
    {
        if (k < 1) {
            throw InputError("SingularSeriesEngine: k must be >= 1");
        }
        if (!(tol > 0)) {
            throw InputError("singular_series: tol must be > 0");
        }
        const u64 ku = static_cast<u64>(k);
        split_ = std::max<u64>({static_cast<u64>(std::max<i64>(max_diameter, 0)), ku * ku, 100, 2 * ku + 2});
        small_ = small_primes(split_);
        if (k == 1) {
            cutoff_ = split_;
            tail_bound_log_ = 0.0;
            return;
        }
        // The head over p <= split can be bounded by the product of its
        // largest possible factors; callers with a better estimate pass it.
        double head = head_bound;
        if (head <= 0) {
            head = 1.0;
            for (u32 p : small_) {
                const double pd = p;
                head *= std::pow(1.0 - 1.0 / pd, -k) * (1.0 - 1.0 / pd);
            }
        }
        const double c = 0.5 * k * (k - 1 + k / 100.0);
        const long double need = static_cast<long double>(c) * head / (2.0L * tol) + k + 2;
        if (need > static_cast<long double>(kMaxSingularSeriesCutoff)) {
            throw ResourceError("singular_series: tolerance requires primes beyond " +
                                std::to_string(kMaxSingularSeriesCutoff));
        }
        cutoff_ = std::max<u64>(split_, static_cast<u64>(need));
        while (head * -std::expm1(-detail::tail_log_bound(k, cutoff_)) > tol) {
            cutoff_ += cutoff_ / 8 + 1;
            if (cutoff_ > kMaxSingularSeriesCutoff) {
                throw ResourceError("singular_series: tolerance requires primes beyond cutoff cap");
            }
        }
        tail_bound_log_ = detail::tail_log_bound(k, cutoff_);
        CompensatedSum g;
        for_each_prime(split_ + 1, cutoff_, [&](u64 p) { g += detail::generic_log_factor(k, static_cast<double>(p)); });
        generic_log_ = g.value();
    }

    int k() const { return k_; }
    u64 cutoff() const { return cutoff_; }

    SingularSeriesValue operator()(const Tuple& H) const
    {
        if (H.k() != k_) {
            throw InputError("SingularSeriesEngine: tuple size mismatch");
        }
        if (static_cast<u64>(std::max<i64>(H.diameter(), 0)) > split_) {
            throw InputError("SingularSeriesEngine: tuple diameter beyond engine range");
        }
        SingularSeriesValue out;
        out.cutoff_prime = cutoff_;
        CompensatedSum log_head;
        for (u32 p : small_) {
            const int nu = residue_count(H, p);
            if (nu == static_cast<int>(p)) {
                out.value = 0.0;
                out.truncation_bound = 0.0;
                return out;
            }
            const double pd = p;
            log_head += std::log1p(-nu / pd) - k_ * std::log1p(-1.0 / pd);
        }
        log_head += generic_log_;
        out.value = std::exp(log_head.value());
        out.truncation_bound = out.value * -std::expm1(-tail_bound_log_);
        return out;
    }

private:
    int k_;
    u64 split_ = 0;
    u64 cutoff_ = 0;
    std::vector<u32> small_;
    double generic_log_ = 0.0;
    double tail_bound_log_ = 0.0;
};

// 𝔖(H) = Π_p (1 - 1/p)^{-k} (1 - ν_p(H)/p), with a certified truncation bound
// <= tol. Inadmissible tuples give exactly zero.
inline SingularSeriesValue singular_series(const Tuple& H, double tol)
{
    if (!(tol > 0)) {
        throw InputError("singular_series: tol must be > 0");
    }
    if (!is_admissible(H)) {
        return {0.0, 0.0, 0};
    }
    if (H.k() == 1) {
        return {1.0, 0.0, 0};
    }
    // First pass over the exact head gives a sharp bound for the cutoff.
    const u64 split = detail::base_cutoff(H);
    double head = 1.0;
    for (u32 p : small_primes(split)) {
        const double pd = p;
        head *= (1.0 - residue_count(H, p) / pd) * std::pow(1.0 - 1.0 / pd, -H.k());
    }
    const SingularSeriesEngine engine(H.k(), H.diameter(), tol, head * (1.0 + 1e-12));
    return engine(H);
}

// Σ over ordered k-tuples of distinct h_i in [1, h] of 𝔖. Equal to k! times
// the sum over k-subsets.
struct GallagherAverage {
    int k = 0;
    i64 h = 0;
    double ordered_sum = 0.0;
    double set_sum = 0.0;
    double ordered_ratio = 0.0; // ordered_sum / h^k
    double set_ratio = 0.0;     // set_sum / (h^k / k!)
    u64 tuples = 0;             // number of k-subsets visited
};

inline void to_json(nlohmann::json& j, const GallagherAverage& g)
{
    j = {{"k", g.k},
         {"h", g.h},
         {"ordered_sum", g.ordered_sum},
         {"set_sum", g.set_sum},
         {"ordered_ratio", g.ordered_ratio},
         {"set_ratio", g.set_ratio},
         {"subsets", g.tuples}};
}

inline double binomial(i64 n, i64 k)
{
    if (k < 0 || k > n) {
        return 0.0;
    }
    return std::exp(std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
                    std::lgamma(static_cast<double>(n - k) + 1));
}

inline constexpr double kMaxGallagherSubsets = 2e7;

inline GallagherAverage gallagher_average(int k, i64 h, double tol = 1e-7)
{
    if (k < 1 || h < k) {
        throw InputError("gallagher_average: need k >= 1 and h >= k");
    }
    if (binomial(h, k) > kMaxGallagherSubsets) {
        throw ResourceError("gallagher_average: C(h,k) exceeds the subset budget");
    }
    GallagherAverage out;
    out.k = k;
    out.h = h;
    double k_fact = std::tgamma(k + 1.0);
    if (k == 1) {
        out.set_sum = static_cast<double>(h);
        out.tuples = static_cast<u64>(h);
    } else {
        const SingularSeriesEngine engine(k, h - 1, tol);
        // Parallel over the smallest element; each task enumerates the rest
        // of the subset in lexicographic order and results merge in order.
        std::vector<CompensatedSum> partial(static_cast<std::size_t>(h));
        std::vector<u64> counts(static_cast<std::size_t>(h), 0);
        parallel_for(static_cast<std::size_t>(h - k + 1), [&](std::size_t t) {
            const i64 first = static_cast<i64>(t) + 1;
            std::vector<i64> cur{first};
            std::function<void(i64)> rec = [&](i64 next) {
                if (static_cast<int>(cur.size()) == k) {
                    const Tuple H(cur);
                    if (is_admissible(H)) {
                        partial[t] += engine(H).value;
                    }
                    ++counts[t];
                    return;
                }
                const i64 remaining = k - static_cast<i64>(cur.size());
                for (i64 x = next; x <= h - remaining + 1; ++x) {
                    cur.push_back(x);
                    rec(x + 1);
                    cur.pop_back();
                }
            };
            rec(first + 1);
        });
        CompensatedSum total;
        for (std::size_t t = 0; t < partial.size(); ++t) {
            total += partial[t];
            out.tuples += counts[t];
        }
        out.set_sum = total.value();
    }
    out.ordered_sum = out.set_sum * k_fact;
    const double hk = std::pow(static_cast<double>(h), k);
    out.ordered_ratio = out.ordered_sum / hk;
    out.set_ratio = out.set_sum / (hk / k_fact);
    return out;
}

// Admissible k-tuple of minimal diameter (<= diameter_cap), first offset 0,
// ties broken lexicographically. Diameters are tried in increasing order, so
// a result is also a certificate that no smaller diameter works.
inline std::optional<Tuple> narrowest_admissible(int k, i64 diameter_cap)
{
    if (k < 1 || k > 10) {
        throw InputError("narrowest_admissible: k must be in [1, 10]");
    }
    if (diameter_cap < k - 1) {
        throw InputError("narrowest_admissible: diameter_cap must be >= k-1");
    }
    if (k == 1) {
        return Tuple{0};
    }
    const auto primes = small_primes(static_cast<u64>(k));
    // occupied[i][r]: how many chosen offsets sit in class r mod primes[i].
    std::vector<std::vector<int>> occupied(primes.size());
    std::vector<int> classes(primes.size(), 0);
    for (std::size_t i = 0; i < primes.size(); ++i) {
        occupied[i].assign(primes[i], 0);
    }
    std::vector<i64> cur;

    auto add = [&](i64 x) {
        bool ok = true;
        for (std::size_t i = 0; i < primes.size(); ++i) {
            const auto r = static_cast<std::size_t>(x % primes[i]);
            if (occupied[i][r]++ == 0 && ++classes[i] == static_cast<int>(primes[i])) {
                ok = false;
            }
        }
        cur.push_back(x);
        return ok;
    };
    auto remove = [&](i64 x) {
        for (std::size_t i = 0; i < primes.size(); ++i) {
            const auto r = static_cast<std::size_t>(x % primes[i]);
            if (--occupied[i][r] == 0) {
                --classes[i];
            }
        }
        cur.pop_back();
    };

    for (i64 D = k - 1; D <= diameter_cap; ++D) {
        std::function<bool(i64)> rec = [&](i64 next) -> bool {
            const int need = k - static_cast<int>(cur.size());
            if (need == 1) {
                const bool ok = add(D);
                if (ok) {
                    return true;
                }
                remove(D);
                return false;
            }
            for (i64 x = next; x <= D - (need - 1); ++x) {
                if (add(x) && rec(x + 1)) {
                    return true;
                }
                remove(x);
            }
            return false;
        };
        const bool ok0 = add(0);
        if (ok0 && rec(1)) {
            return Tuple(cur);
        }
        while (!cur.empty()) {
            remove(cur.back());
        }
    }
    return std::nullopt;
}

} // namespace tuplesieve

#endif // TUPLESIEVE_TUPLES_HPP
