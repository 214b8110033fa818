#ifndef TUPLESIEVE_CORRELATIONS_HPP
#define TUPLESIEVE_CORRELATIONS_HPP

#include <array>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core_arith.hpp"
#include "divisor_sums.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "summation.hpp"
#include "tuples.hpp"

namespace tuplesieve {

inline constexpr int kSchemaVersion = 1;

// One empirical sum and, where a main term is known, its prediction.
struct Measurement {
    std::string name;
    double empirical = 0.0;
    std::optional<double> predicted_main;
    std::optional<double> ratio;
};

inline Measurement measure(std::string name, double empirical, std::optional<double> predicted = std::nullopt)
{
    Measurement m{std::move(name), empirical, predicted, std::nullopt};
    if (predicted && *predicted != 0.0) {
        m.ratio = empirical / *predicted;
    }
    return m;
}

inline void to_json(nlohmann::json& j, const Measurement& m)
{
    j = {{"name", m.name}, {"empirical", m.empirical}};
    j["predicted_main"] = m.predicted_main ? nlohmann::json(*m.predicted_main) : nlohmann::json();
    j["ratio"] = m.ratio ? nlohmann::json(*m.ratio) : nlohmann::json();
}

struct CorrelationReport {
    std::string kind;
    i64 N = 0;
    double R = 0.0;
    nlohmann::json parameters = nlohmann::json::object();
    std::vector<Measurement> measurements; // first entry is the primary sum
    std::vector<std::string> warnings;

    const Measurement& primary() const { return measurements.at(0); }
    double empirical() const { return primary().empirical; }
    std::optional<double> predicted_main() const { return primary().predicted_main; }
    std::optional<double> ratio() const { return primary().ratio; }

    const Measurement& get(const std::string& name) const
    {
        for (const auto& m : measurements) {
            if (m.name == name) {
                return m;
            }
        }
        throw InputError("CorrelationReport: no measurement '" + name + "'");
    }
};

inline void to_json(nlohmann::json& j, const CorrelationReport& r)
{
    j = {{"schema_version", kSchemaVersion},
         {"report", "correlation"},
         {"kind", r.kind},
         {"N", r.N},
         {"R", r.R},
         {"parameters", r.parameters},
         {"measurements", r.measurements},
         {"warnings", r.warnings}};
}

// Deterministic sums over n in (start, end]: fixed-size chunks, compensated
// per chunk, merged in chunk order. fn(n, acc) adds into acc[0..M).
template <std::size_t M, typename Fn>
std::array<double, M> chunked_sums(i64 start, i64 end, Fn&& fn)
{
    std::array<double, M> out{};
    if (end <= start) {
        return out;
    }
    const auto chunks = make_chunks(start, end, kDefaultChunk);
    std::vector<std::array<CompensatedSum, M>> partial(chunks.size());
    parallel_for(chunks.size(), [&](std::size_t c) {
        std::array<double, M> terms{};
        for (i64 n = chunks[c].lo + 1; n <= chunks[c].hi; ++n) {
            terms.fill(0.0);
            fn(n, terms);
            for (std::size_t i = 0; i < M; ++i) {
                partial[c][i] += terms[i];
            }
        }
    });
    std::array<CompensatedSum, M> total{};
    for (const auto& p : partial) {
        for (std::size_t i = 0; i < M; ++i) {
            total[i] += p[i];
        }
    }
    for (std::size_t i = 0; i < M; ++i) {
        out[i] = total[i].value();
    }
    return out;
}

namespace detail {

inline void require(bool ok, const std::string& msg)
{
    if (!ok) {
        throw InputError(msg);
    }
}

// Singular-series tolerance used for predicted main terms.
inline constexpr double kPredictionTol = 1e-8;

} // namespace detail

// Σ_{n<=N} Λ_R(n)Λ_R(n+j) and Σ_{n<=N} Λ(n)Λ_R(n+j), both against 𝔖({0,j}) N.
inline CorrelationReport corr_pair(i64 N, double R, i64 j)
{
    detail::require(j != 0, "corr_pair: shift must be nonzero (use corr_self)");
    detail::require(N >= 2, "corr_pair: N must be >= 2");
    detail::require(R >= 1 && R <= static_cast<double>(N), "corr_pair: need 1 <= R <= N");
    detail::require(static_cast<double>(std::llabs(j)) <= R, "corr_pair: need |j| <= R");
    const i64 top = N + std::max<i64>(j, 0);
    const auto lr = lambda_R_interval(0, top, R);
    const auto primes = sieve_primes(static_cast<u64>(std::max<i64>(top, 2)));
    const auto lam = von_mangoldt_table(primes, static_cast<u64>(top));
    const auto s = chunked_sums<2>(0, N, [&](i64 n, std::array<double, 2>& acc) {
        const i64 m = n + j;
        if (m < 1) {
            return;
        }
        const double w = lr.values[static_cast<std::size_t>(m - 1)];
        acc[0] = lr.values[static_cast<std::size_t>(n - 1)] * w;
        acc[1] = lam[static_cast<std::size_t>(n)] * w;
    });
    const double sing = singular_series(Tuple{0, j}, detail::kPredictionTol).value;
    CorrelationReport r;
    r.kind = "pair";
    r.N = N;
    r.R = R;
    r.parameters = {{"shift", j}, {"singular_series", sing}};
    const double pred = sing * static_cast<double>(N);
    r.measurements.push_back(measure("lambdaR_lambdaR", s[0], pred));
    r.measurements.push_back(measure("lambda_lambdaR", s[1], pred));
    return r;
}

// Σ_{n<=N} Λ_R(n)^2 and Σ_{n<=N} Λ(n)Λ_R(n), both against N log R.
inline CorrelationReport corr_self(i64 N, double R)
{
    detail::require(R >= 2 && R <= static_cast<double>(N), "corr_self: need 2 <= R <= N");
    const auto lr = lambda_R_interval(0, N, R);
    const auto primes = sieve_primes(static_cast<u64>(N));
    const auto lam = von_mangoldt_table(primes, static_cast<u64>(N));
    const auto s = chunked_sums<2>(0, N, [&](i64 n, std::array<double, 2>& acc) {
        const double w = lr.values[static_cast<std::size_t>(n - 1)];
        acc[0] = w * w;
        acc[1] = lam[static_cast<std::size_t>(n)] * w;
    });
    CorrelationReport r;
    r.kind = "self";
    r.N = N;
    r.R = R;
    const double pred = static_cast<double>(N) * std::log(R);
    r.measurements.push_back(measure("lambdaR_squared", s[0], pred));
    r.measurements.push_back(measure("lambda_lambdaR", s[1], pred));
    return r;
}

inline constexpr int kMaxCorrelationOrder = 40;

namespace detail {

inline void check_gpy_pair(const Tuple& H1, int ell1, const Tuple& H2, int ell2, i64 N, double R)
{
    require(N >= 4, "gpy correlation: N must be >= 4");
    require(R >= 1 && R * R <= static_cast<double>(N), "gpy correlation: need 1 <= R <= N^(1/2)");
    require(H1.k() + H2.k() + ell1 + ell2 <= kMaxCorrelationOrder,
            "gpy correlation: |H1|+|H2|+l1+l2 exceeds the configured bound");
}

inline nlohmann::json gpy_params(const Tuple& H1, int ell1, const Tuple& H2, int ell2)
{
    return {{"H1", H1}, {"ell1", ell1}, {"H2", H2}, {"ell2", ell2}};
}

} // namespace detail

// Σ_{n<=N} Λ_R(n;H1,l1) Λ_R(n;H2,l2). No main term is attached.
inline CorrelationReport corr_gpy_pair(const Tuple& H1, int ell1, const Tuple& H2, int ell2, i64 N, double R)
{
    detail::check_gpy_pair(H1, ell1, H2, ell2, N, R);
    const auto w1 = gpy_weight_interval(H1, ell1, 0, N, R);
    const auto w2 = gpy_weight_interval(H2, ell2, 0, N, R);
    const auto s = chunked_sums<1>(0, N, [&](i64 n, std::array<double, 1>& acc) {
        const auto i = static_cast<std::size_t>(n - 1);
        acc[0] = w1.values[i] * w2.values[i];
    });
    CorrelationReport r;
    r.kind = "gpy_pair";
    r.N = N;
    r.R = R;
    r.parameters = detail::gpy_params(H1, ell1, H2, ell2);
    r.measurements.push_back(measure("gpy_pair", s[0]));
    return r;
}

enum class ThetaCase { outside, only_first, only_second, both };

inline const char* case_name(ThetaCase c)
{
    switch (c) {
    case ThetaCase::outside: return "h0 not in H1 union H2";
    case ThetaCase::only_first: return "h0 in H1 minus H2";
    case ThetaCase::only_second: return "h0 in H2 minus H1";
    case ThetaCase::both: return "h0 in H1 intersect H2";
    }
    return "";
}

inline ThetaCase classify_theta_case(const Tuple& H1, const Tuple& H2, i64 h0)
{
    const bool a = H1.contains(h0);
    const bool b = H2.contains(h0);
    if (a && b) {
        return ThetaCase::both;
    }
    if (a) {
        return ThetaCase::only_first;
    }
    return b ? ThetaCase::only_second : ThetaCase::outside;
}

// Σ_{n<=N} Λ_R(n;H1,l1) Λ_R(n;H2,l2) θ(n+h0), tagged with its case.
inline CorrelationReport corr_gpy_theta(const Tuple& H1, int ell1, const Tuple& H2, int ell2, i64 h0, i64 N,
                                        double R)
{
    detail::check_gpy_pair(H1, ell1, H2, ell2, N, R);
    const auto w1 = gpy_weight_interval(H1, ell1, 0, N, R);
    const auto w2 = gpy_weight_interval(H2, ell2, 0, N, R);
    const i64 top = std::max<i64>(N + h0, 2);
    const auto primes = sieve_primes(static_cast<u64>(top));
    const auto theta = theta_table(primes, static_cast<u64>(top));
    const auto s = chunked_sums<1>(0, N, [&](i64 n, std::array<double, 1>& acc) {
        const i64 m = n + h0;
        if (m < 2) {
            return;
        }
        const auto i = static_cast<std::size_t>(n - 1);
        acc[0] = w1.values[i] * w2.values[i] * theta[static_cast<std::size_t>(m)];
    });
    CorrelationReport r;
    r.kind = "gpy_theta";
    r.N = N;
    r.R = R;
    r.parameters = detail::gpy_params(H1, ell1, H2, ell2);
    r.parameters["h0"] = h0;
    r.parameters["case"] = case_name(classify_theta_case(H1, H2, h0));
    r.measurements.push_back(measure("gpy_theta", s[0]));
    return r;
}

// Σ_{n<=N} Π Λ(n+h_i) against 𝔖(H) N, and the count of n <= N with every
// n+h_i prime against 𝔖(H) Σ_{2<n<=N} (log n)^{-k}.
inline CorrelationReport hardy_littlewood_count(const Tuple& H, i64 N)
{
    detail::require(N >= 10, "hardy_littlewood_count: N must be >= 10");
    const i64 top = std::max<i64>(N + H.offsets().back(), 2);
    const auto primes = sieve_primes(static_cast<u64>(top));
    const auto lam = von_mangoldt_table(primes, static_cast<u64>(top));
    const int k = H.k();
    const auto s = chunked_sums<3>(0, N, [&](i64 n, std::array<double, 3>& acc) {
        double prod = 1.0;
        bool all_prime = true;
        for (i64 h : H.offsets()) {
            const i64 m = n + h;
            if (m < 2) {
                prod = 0.0;
                all_prime = false;
                break;
            }
            prod *= lam[static_cast<std::size_t>(m)];
            all_prime = all_prime && primes.is_prime(static_cast<u64>(m));
        }
        acc[0] = prod;
        acc[1] = all_prime ? 1.0 : 0.0;
        if (n > 2) {
            acc[2] = std::pow(std::log(static_cast<double>(n)), -k);
        }
    });
    const double sing = singular_series(H, detail::kPredictionTol).value;
    CorrelationReport r;
    r.kind = "hardy_littlewood";
    r.N = N;
    r.R = 0.0;
    r.parameters = {{"tuple", H}, {"singular_series", sing}, {"admissible", is_admissible(H)}};
    r.measurements.push_back(measure("lambda_product", s[0], sing * static_cast<double>(N)));
    r.measurements.push_back(measure("prime_tuples", s[1], sing * s[2]));
    return r;
}

// Σ_{N<n<=2N} (ψ(n+h) - ψ(n))^2 with h = round(λ log N), against
// (λ̂ + λ̂²) N (log N)^2 where λ̂ = h / log N.
inline CorrelationReport second_moment(i64 N, double lambda_param)
{
    detail::require(lambda_param > 0 && lambda_param <= 10, "second_moment: lambda must be in (0, 10]");
    detail::require(N >= 2, "second_moment: N must be >= 2");
    const double log_n = std::log(static_cast<double>(N));
    const i64 h = std::llround(lambda_param * log_n);
    const double lam_hat = static_cast<double>(h) / log_n;
    CorrelationReport r;
    r.kind = "second_moment";
    r.N = N;
    r.parameters = {{"lambda", lambda_param}, {"h", h}, {"lambda_hat", lam_hat}};
    if (h == 0) {
        r.measurements.push_back(measure("second_moment", 0.0, 0.0));
        r.measurements.push_back(measure("first_moment", 0.0));
        return r;
    }
    const i64 top = 2 * N + h;
    const auto primes = sieve_primes(static_cast<u64>(top));
    const auto lam = von_mangoldt_table(primes, static_cast<u64>(top));
    const auto s = chunked_sums<2>(N, 2 * N, [&](i64 n, std::array<double, 2>& acc) {
        double w = 0.0;
        for (i64 m = n + 1; m <= n + h; ++m) {
            w += lam[static_cast<std::size_t>(m)];
        }
        acc[0] = w * w;
        acc[1] = w;
    });
    const double pred = (lam_hat + lam_hat * lam_hat) * static_cast<double>(N) * log_n * log_n;
    r.measurements.push_back(measure("second_moment", s[0], pred));
    r.measurements.push_back(measure("first_moment", s[1], static_cast<double>(N * h)));
    return r;
}

} // namespace tuplesieve

#endif // TUPLESIEVE_CORRELATIONS_HPP
