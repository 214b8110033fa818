#ifndef TUPLESIEVE_DETECTOR_HPP
#define TUPLESIEVE_DETECTOR_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "core_arith.hpp"
#include "correlations.hpp"
#include "divisor_sums.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "summation.hpp"
#include "tuples.hpp"

namespace tuplesieve {

enum class DetectorForm { first_moment, mollified, gpy_sum, gs_single, heathbrown };

inline const char* form_name(DetectorForm f)
{
    switch (f) {
    case DetectorForm::first_moment: return "first_moment";
    case DetectorForm::mollified: return "mollified";
    case DetectorForm::gpy_sum: return "gpy_sum";
    case DetectorForm::gs_single: return "gs_single";
    case DetectorForm::heathbrown: return "heathbrown";
    }
    return "";
}

struct Witness {
    i64 n = 0;
    std::string event;
    bool verified = false;
};

inline void to_json(nlohmann::json& j, const Witness& w)
{
    j = {{"n", w.n}, {"event", w.event}, {"verified", w.verified}};
}

struct Component {
    std::string name;
    double value = 0.0;
    // Coefficient of this component in the recombined total; zero for
    // informational entries.
    double weight = 0.0;
};

struct DetectorReport {
    DetectorForm form = DetectorForm::first_moment;
    nlohmann::json parameters = nlohmann::json::object();
    double total = 0.0;
    std::vector<Component> components;
    std::vector<Witness> witnesses;
    u64 witness_events = 0; // events found, including those beyond the cap
    nlohmann::json flags = nlohmann::json::object();
    std::vector<std::string> warnings;

    double component(const std::string& name) const
    {
        for (const auto& c : components) {
            if (c.name == name) {
                return c.value;
            }
        }
        throw InputError("DetectorReport: no component '" + name + "'");
    }

    double recombined() const
    {
        CompensatedSum s;
        for (const auto& c : components) {
            if (c.weight != 0.0) {
                s += c.weight * c.value;
            }
        }
        return s.value();
    }
};

inline void to_json(nlohmann::json& j, const DetectorReport& r)
{
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : r.components) {
        comps.push_back({{"name", c.name}, {"value", c.value}, {"weight", c.weight}});
    }
    j = {{"schema_version", kSchemaVersion},
         {"report", "detector"},
         {"form", form_name(r.form)},
         {"parameters", r.parameters},
         {"total", r.total},
         {"components", comps},
         {"flags", r.flags},
         {"witness_events", r.witness_events},
         {"witnesses", r.witnesses},
         {"warnings", r.warnings}};
}

inline constexpr u64 kDefaultWitnessCap = 1000000;

namespace detail {

inline void finish(DetectorReport& r)
{
    r.total = r.recombined();
}

// ψ(n,h) recomputed by Miller-Rabin on each m in (n, n+h]; prime powers are
// found by taking integer roots.
inline double psi_window_direct(i64 n, i64 h)
{
    double s = 0.0;
    for (i64 m = n + 1; m <= n + h; ++m) {
        if (m < 2) {
            continue;
        }
        const u64 mu = static_cast<u64>(m);
        for (int e = 1; e < 64; ++e) {
            const u64 r = static_cast<u64>(std::llround(std::pow(static_cast<double>(mu), 1.0 / e)));
            bool hit = false;
            for (u64 c = (r > 1 ? r - 1 : 1); c <= r + 1; ++c) {
                u64 pw = 1;
                bool overflow = false;
                for (int i = 0; i < e; ++i) {
                    if (pw > mu / std::max<u64>(c, 1)) {
                        overflow = true;
                        break;
                    }
                    pw *= c;
                }
                if (!overflow && pw == mu && is_prime_mr(c)) {
                    s += std::log(static_cast<double>(c));
                    hit = true;
                    break;
                }
            }
            if (hit || (u64{1} << std::min(e, 63)) > mu) {
                break;
            }
        }
    }
    return s;
}

inline int primes_in_window_direct(i64 n, i64 h)
{
    int c = 0;
    for (i64 m = n + 1; m <= n + h; ++m) {
        c += (m > 1 && is_prime_mr(static_cast<u64>(m))) ? 1 : 0;
    }
    return c;
}

inline i64 window_length(i64 N, double lambda_param)
{
    require(lambda_param > 0, "lambda must be > 0");
    const i64 h = std::llround(lambda_param * std::log(static_cast<double>(N)));
    require(h >= 1, "window h = round(lambda log N) must be >= 1");
    return h;
}

// ψ(n,h) and ψ_R(n,h) for n in (N, 2N].
struct Windows {
    std::vector<double> psi;
    std::vector<double> psi_r;
};

inline Windows short_windows(i64 N, i64 h, double R)
{
    const i64 top = 2 * N + h;
    const auto primes = sieve_primes(static_cast<u64>(top));
    const auto lam = von_mangoldt_table(primes, static_cast<u64>(top));
    const auto lr = lambda_R_interval(N, top, R);
    Windows w;
    w.psi.assign(static_cast<std::size_t>(N), 0.0);
    w.psi_r.assign(static_cast<std::size_t>(N), 0.0);
    const auto chunks = make_chunks(N, 2 * N, kDefaultChunk);
    parallel_for(chunks.size(), [&](std::size_t c) {
        for (i64 n = chunks[c].lo + 1; n <= chunks[c].hi; ++n) {
            double a = 0.0;
            double b = 0.0;
            for (i64 m = n + 1; m <= n + h; ++m) {
                a += lam[static_cast<std::size_t>(m)];
                b += lr.values[static_cast<std::size_t>(m - N - 1)];
            }
            w.psi[static_cast<std::size_t>(n - N - 1)] = a;
            w.psi_r[static_cast<std::size_t>(n - N - 1)] = b;
        }
    });
    return w;
}

} // namespace detail

// Σ_{N<n<=2N} (ψ(n,h) - ψ_R(n,h))^2 >= 0 expanded into its diagonal and cross
// pieces, with the implied lower bound (λ̂/2 + λ̂²) N (log N)^2 and the
// single-prime ceiling λ̂ N (log N)^2.
inline DetectorReport first_moment_gap(i64 N, double lambda_param, double R)
{
    detail::require(N >= 4, "first_moment_gap: N must be >= 4");
    detail::require(R >= 1 && R * R <= static_cast<double>(N), "first_moment_gap: need 1 <= R <= N^(1/2)");
    const i64 h = detail::window_length(N, lambda_param);
    const double log_n = std::log(static_cast<double>(N));
    const double lam_hat = static_cast<double>(h) / log_n;
    const auto w = detail::short_windows(N, h, R);
    const auto s = chunked_sums<5>(N, 2 * N, [&](i64 n, std::array<double, 5>& acc) {
        const auto i = static_cast<std::size_t>(n - N - 1);
        const double a = w.psi[i];
        const double b = w.psi_r[i];
        acc[0] = a * a;
        acc[1] = a * b;
        acc[2] = b * b;
        acc[3] = (a - b) * (a - b);
        acc[4] = a;
    });
    DetectorReport r;
    r.form = DetectorForm::first_moment;
    r.parameters = {{"N", N}, {"lambda", lambda_param}, {"h", h}, {"lambda_hat", lam_hat}, {"R", R}};
    const double scale = static_cast<double>(N) * log_n * log_n;
    const double lower = (lam_hat / 2 + lam_hat * lam_hat) * scale;
    const double ceiling = lam_hat * scale;
    r.components = {{"psi_squared", s[0], 1.0},
                    {"psi_psiR", s[1], -2.0},
                    {"psiR_squared", s[2], 1.0},
                    {"direct_square_sum", s[3], 0.0},
                    {"psi_sum", s[4], 0.0},
                    {"implied_lower_bound", lower, 0.0},
                    {"single_prime_ceiling", ceiling, 0.0},
                    {"empirical_single_prime_ceiling", log_n * s[4], 0.0}};
    detail::finish(r);
    r.flags = {{"threshold_exceeded", lower > ceiling},
               {"empirical_exceeds_single_prime_ceiling", s[0] > log_n * s[4]}};
    return r;
}

// Σ_{N<n<=2N} (ψ(n,h) - ρ log N)(ψ_R(n,h) - C)^2. When positive with ρ > 1,
// windows with ψ(n,h) >= 2 log N are listed and re-verified.
inline DetectorReport mollified_moment(i64 N, double lambda_param, double R, double rho, double C,
                                       u64 witness_cap = kDefaultWitnessCap)
{
    detail::require(N >= 4, "mollified_moment: N must be >= 4");
    detail::require(rho >= 0, "mollified_moment: rho must be >= 0");
    detail::require(C >= 0, "mollified_moment: C must be >= 0");
    detail::require(R >= 1, "mollified_moment: R must be >= 1");
    const i64 h = detail::window_length(N, lambda_param);
    const double log_n = std::log(static_cast<double>(N));
    const auto w = detail::short_windows(N, h, R);
    const auto s = chunked_sums<2>(N, 2 * N, [&](i64 n, std::array<double, 2>& acc) {
        const auto i = static_cast<std::size_t>(n - N - 1);
        const double b = w.psi_r[i] - C;
        acc[0] = w.psi[i] * b * b;
        acc[1] = b * b;
    });
    DetectorReport r;
    r.form = DetectorForm::mollified;
    r.parameters = {{"N", N}, {"lambda", lambda_param}, {"h", h}, {"R", R}, {"rho", rho}, {"C", C}};
    r.components = {{"prime_mass", s[0], 1.0},
                    {"penalty", rho * log_n * s[1], -1.0},
                    {"weight_mass", s[1], 0.0}};
    detail::finish(r);
    r.flags = {{"positive", r.total > 0}};
    if (r.total > 0 && rho > 1) {
        const double threshold = 2 * log_n;
        for (i64 n = N + 1; n <= 2 * N; ++n) {
            const double v = w.psi[static_cast<std::size_t>(n - N - 1)];
            if (v < threshold) {
                continue;
            }
            ++r.witness_events;
            if (r.witnesses.size() >= witness_cap) {
                continue;
            }
            const double check = detail::psi_window_direct(n, h);
            if (std::fabs(check - v) > 1e-9 * std::max(1.0, v) || check < threshold) {
                throw VerificationError("mollified_moment: witness n=" + std::to_string(n) + " failed re-check");
            }
            r.witnesses.push_back({n, "psi(n,h) >= 2 log N", true});
        }
    }
    return r;
}

inline constexpr double kMaxGpySubsets = 230300; // C(50, 4)

// Σ_{n=N+1}^{2N} (Σ_{1<=h0<=h} θ(n+h0) - r log 3N)(Σ_{H ⊂ {1..h}, |H|=k} Λ_R(n;H,ℓ))^2.
inline DetectorReport gpy_form(i64 N, i64 h, int k, int ell, int r_count, double R,
                               u64 witness_cap = kDefaultWitnessCap)
{
    detail::require(N >= 4, "gpy_form: N must be >= 4");
    detail::require(h >= 1 && k >= 1 && k <= h, "gpy_form: need 1 <= k <= h");
    detail::require(ell >= 0 && ell <= k, "gpy_form: need 0 <= ell <= k");
    detail::require(r_count >= 0, "gpy_form: r must be >= 0");
    detail::require(R >= 1 && R * R <= static_cast<double>(N), "gpy_form: need 1 <= R <= N^(1/2)");
    if (binomial(h, k) > kMaxGpySubsets) {
        throw ResourceError("gpy_form: C(h,k) exceeds the subset budget");
    }
    const std::size_t len = static_cast<std::size_t>(N);
    std::vector<double> weight(len, 0.0);
    std::vector<i64> cur;
    u64 subsets = 0;
    auto rec = [&](auto&& self, i64 next) -> void {
        if (static_cast<int>(cur.size()) == k) {
            const auto t = gpy_weight_interval(Tuple(cur), ell, N, 2 * N, R);
            for (std::size_t i = 0; i < len; ++i) {
                weight[i] += t.values[i];
            }
            ++subsets;
            return;
        }
        for (i64 x = next; x <= h - (k - static_cast<i64>(cur.size())) + 1; ++x) {
            cur.push_back(x);
            self(self, x + 1);
            cur.pop_back();
        }
    };
    rec(rec, 1);

    const i64 top = 2 * N + h;
    const auto primes = sieve_primes(static_cast<u64>(top));
    const auto theta = theta_table(primes, static_cast<u64>(top));
    const auto s = chunked_sums<3>(N, 2 * N, [&](i64 n, std::array<double, 3>& acc) {
        double t = 0.0;
        for (i64 m = n + 1; m <= n + h; ++m) {
            t += theta[static_cast<std::size_t>(m)];
        }
        const double w = weight[static_cast<std::size_t>(n - N - 1)];
        acc[0] = t * w * w;
        acc[1] = w * w;
        acc[2] = w;
    });
    const double log3n = std::log(3.0 * static_cast<double>(N));
    DetectorReport rep;
    rep.form = DetectorForm::gpy_sum;
    rep.parameters = {{"N", N}, {"h", h}, {"k", k}, {"ell", ell}, {"r", r_count}, {"R", R}, {"subsets", subsets}};
    rep.components = {{"prime_mass", s[0], 1.0},
                      {"penalty", r_count * log3n * s[1], -1.0},
                      {"weight_square_mass", s[1], 0.0},
                      {"weight_mass", s[2], 0.0}};
    detail::finish(rep);
    rep.flags = {{"positive", rep.total > 0}};
    for (i64 n = N + 1; n <= 2 * N; ++n) {
        int c = 0;
        for (i64 m = n + 1; m <= n + h; ++m) {
            c += primes.is_prime(static_cast<u64>(m)) ? 1 : 0;
        }
        if (c < r_count + 1) {
            continue;
        }
        ++rep.witness_events;
        if (rep.witnesses.size() >= witness_cap) {
            continue;
        }
        if (detail::primes_in_window_direct(n, h) != c) {
            throw VerificationError("gpy_form: witness n=" + std::to_string(n) + " failed re-check");
        }
        rep.witnesses.push_back({n, std::to_string(c) + " primes in (n, n+h]", true});
    }
    return rep;
}

// Σ_{N<n<=2N} (Σ_i Λ(n+h_i) - r log 3N)(Λ_R(n;H,ℓ))^2 for one tuple.
inline DetectorReport gs_single_tuple(const Tuple& H, int ell, int r_count, i64 N, double R,
                                      u64 witness_cap = kDefaultWitnessCap)
{
    detail::require(N >= 4, "gs_single_tuple: N must be >= 4");
    detail::require(r_count >= 0, "gs_single_tuple: r must be >= 0");
    const auto wt = gpy_weight_interval(H, ell, N, 2 * N, R);
    const i64 top = std::max<i64>(2 * N + H.offsets().back(), 2);
    const auto primes = sieve_primes(static_cast<u64>(top));
    const auto lam = von_mangoldt_table(primes, static_cast<u64>(top));
    auto value_at = [&](const std::vector<double>& table, i64 m) {
        return m < 0 ? 0.0 : table[static_cast<std::size_t>(m)];
    };
    const auto s = chunked_sums<2>(N, 2 * N, [&](i64 n, std::array<double, 2>& acc) {
        double t = 0.0;
        for (i64 hi : H.offsets()) {
            t += value_at(lam, n + hi);
        }
        const double w = wt.values[static_cast<std::size_t>(n - N - 1)];
        acc[0] = t * w * w;
        acc[1] = w * w;
    });
    const double log3n = std::log(3.0 * static_cast<double>(N));
    DetectorReport rep;
    rep.form = DetectorForm::gs_single;
    rep.parameters = {{"N", N}, {"tuple", H}, {"ell", ell}, {"r", r_count}, {"R", R}};
    rep.components = {{"prime_mass", s[0], 1.0},
                      {"penalty", r_count * log3n * s[1], -1.0},
                      {"weight_square_mass", s[1], 0.0}};
    detail::finish(rep);
    const bool admissible = is_admissible(H);
    rep.flags = {{"positive", rep.total > 0}, {"admissible", admissible}};
    if (!admissible) {
        rep.warnings.push_back("tuple is inadmissible");
    }
    for (i64 n = N + 1; n <= 2 * N; ++n) {
        int c = 0;
        for (i64 hi : H.offsets()) {
            const i64 m = n + hi;
            c += (m >= 2 && primes.is_prime(static_cast<u64>(m))) ? 1 : 0;
        }
        if (c < r_count + 1) {
            continue;
        }
        ++rep.witness_events;
        if (rep.witnesses.size() >= witness_cap) {
            continue;
        }
        int check = 0;
        for (i64 hi : H.offsets()) {
            const i64 m = n + hi;
            check += (m >= 2 && is_prime_mr(static_cast<u64>(m))) ? 1 : 0;
        }
        if (check != c) {
            throw VerificationError("gs_single_tuple: witness n=" + std::to_string(n) + " failed re-check");
        }
        rep.witnesses.push_back({n, std::to_string(c) + " primes among n+h_i", true});
    }
    return rep;
}

// Q = Σ_{n<=x} {1 - ρ Σ_i τ(a_i n + b_i)} (Σ_{d|Π} λ_d)^2 with
// λ_d = μ(d)(log(R/d)/log R)^{k+1} for d <= R; Q = Q1 - ρ Q2.
inline DetectorReport heathbrown_Q(const std::vector<LinearForm>& pairs, double rho, i64 x, double R,
                                   u64 witness_cap = kDefaultWitnessCap)
{
    detail::require(!pairs.empty(), "heathbrown_Q: at least one form required");
    detail::require(x >= 1, "heathbrown_Q: x must be >= 1");
    detail::require(rho >= 0, "heathbrown_Q: rho must be >= 0");
    detail::require(R >= 2, "heathbrown_Q: R must be >= 2");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        detail::require(pairs[i].a >= 1, "heathbrown_Q: a_i must be >= 1");
        detail::require(pairs[i].a + pairs[i].b >= 1, "heathbrown_Q: a_i n + b_i must be positive for n >= 1");
        for (std::size_t j = 0; j < i; ++j) {
            if (pairs[i].a * pairs[j].b - pairs[j].a * pairs[i].b == 0) {
                throw InputError("heathbrown_Q: forms " + std::to_string(j) + " and " + std::to_string(i) +
                                 " are proportional");
            }
        }
    }
    const int k = static_cast<int>(pairs.size());
    i64 top = 1;
    for (const auto& f : pairs) {
        top = std::max(top, f.a * x + f.b);
    }
    const auto mob = sieve_mobius(static_cast<u64>(top));
    const auto w = selberg_weights(pairs, 0, x, R);

    // With a_i = 1 the forms are the tuple {b_i}; Q1 then also follows from
    // the ℓ = 1 GPY weight.
    bool unit = true;
    std::vector<i64> offsets;
    for (const auto& f : pairs) {
        unit = unit && f.a == 1;
        offsets.push_back(f.b);
    }
    std::vector<double> gpy;
    if (unit) {
        gpy = gpy_weight_interval(Tuple(offsets), 1, 0, x, R).values;
    }

    const auto s = chunked_sums<3>(0, x, [&](i64 n, std::array<double, 3>& acc) {
        const auto i = static_cast<std::size_t>(n - 1);
        const double w2 = w[i] * w[i];
        u64 tau = 0;
        for (const auto& f : pairs) {
            tau += mob.divisor_count(static_cast<u64>(f.a * n + f.b));
        }
        acc[0] = w2;
        acc[1] = static_cast<double>(tau) * w2;
        if (unit) {
            acc[2] = gpy[i] * gpy[i];
        }
    });
    DetectorReport rep;
    rep.form = DetectorForm::heathbrown;
    nlohmann::json jp = nlohmann::json::array();
    for (const auto& f : pairs) {
        jp.push_back({f.a, f.b});
    }
    rep.parameters = {{"pairs", jp}, {"rho", rho}, {"x", x}, {"R", R}, {"k", k}};
    rep.components = {{"Q1", s[0], 1.0}, {"Q2", s[1], -rho}};
    if (unit) {
        const double log_r = std::log(R);
        const double scale = std::exp(2 * std::lgamma(k + 2.0) - (2 * k + 2) * std::log(log_r));
        rep.components.push_back({"Q1_via_gpy", scale * s[2], 0.0});
    }
    detail::finish(rep);
    // Witnesses are listed whatever the sign of Q; a positive Q additionally
    // certifies that at least one exists.
    rep.flags = {{"positive", rep.total > 0}};
    if (rho > 0) {
        const double bound = 1.0 / rho;
        for (i64 n = 1; n <= x; ++n) {
            u64 tau = 0;
            for (const auto& f : pairs) {
                tau += mob.divisor_count(static_cast<u64>(f.a * n + f.b));
            }
            if (!(static_cast<double>(tau) < bound)) {
                continue;
            }
            ++rep.witness_events;
            if (rep.witnesses.size() >= witness_cap) {
                continue;
            }
            u64 check = 0;
            for (const auto& f : pairs) {
                check += divisor_count_trial(static_cast<u64>(f.a * n + f.b));
            }
            if (check != tau || !(static_cast<double>(check) < bound)) {
                throw VerificationError("heathbrown_Q: witness n=" + std::to_string(n) + " failed re-check");
            }
            rep.witnesses.push_back({n, "sum of tau = " + std::to_string(tau), true});
        }
    }
    return rep;
}

struct PrimeGap {
    u64 p = 0; // p_n
    u64 q = 0; // p_{n+r}
    double normalized = 0.0;
};

struct GapScan {
    u64 limit = 0;
    int r = 1;
    double threshold = 0.25;
    std::vector<PrimeGap> gaps;
    double min_normalized = 0.0;
    u64 min_gap = 0;
    double proportion_below = 0.0;
};

inline void to_json(nlohmann::json& j, const GapScan& g, bool include_gaps)
{
    j = {{"schema_version", kSchemaVersion},
         {"report", "gap_scan"},
         {"limit", g.limit},
         {"r", g.r},
         {"threshold", g.threshold},
         {"count", g.gaps.size()},
         {"min_normalized", g.min_normalized},
         {"min_gap", g.min_gap},
         {"proportion_below", g.proportion_below}};
    if (include_gaps) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : g.gaps) {
            arr.push_back({e.p, e.q, e.normalized});
        }
        j["gaps"] = arr;
    }
}

// All (p_n, p_{n+r}) with p_{n+r} <= limit and (p_{n+r} - p_n)/log p_n.
inline GapScan gap_scan(u64 limit, int r, double threshold = 0.25)
{
    detail::require(limit >= 100, "gap_scan: limit must be >= 100");
    detail::require(r >= 1, "gap_scan: r must be >= 1");
    const auto primes = sieve_primes(limit);
    const auto ps = primes.primes();
    GapScan out;
    out.limit = limit;
    out.r = r;
    out.threshold = threshold;
    const auto ru = static_cast<std::size_t>(r);
    if (ps.size() <= ru) {
        return out;
    }
    out.gaps.reserve(ps.size() - ru);
    u64 below = 0;
    out.min_normalized = INFINITY;
    out.min_gap = ~u64{0};
    for (std::size_t i = 0; i + ru < ps.size(); ++i) {
        const u64 p = ps[i];
        const u64 q = ps[i + ru];
        const double g = static_cast<double>(q - p) / std::log(static_cast<double>(p));
        out.gaps.push_back({p, q, g});
        out.min_normalized = std::min(out.min_normalized, g);
        out.min_gap = std::min(out.min_gap, q - p);
        below += g < threshold ? 1 : 0;
    }
    out.proportion_below = static_cast<double>(below) / static_cast<double>(out.gaps.size());
    return out;
}

} // namespace tuplesieve

#endif // TUPLESIEVE_DETECTOR_HPP
