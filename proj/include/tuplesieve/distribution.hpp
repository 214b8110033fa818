#ifndef TUPLESIEVE_DISTRIBUTION_HPP
#define TUPLESIEVE_DISTRIBUTION_HPP

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "core_arith.hpp"
#include "correlations.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "summation.hpp"

namespace tuplesieve {

// Θ(N;q,a) = Σ_{p<=N, p≡a (q)} log p.
inline double theta_progression(const PrimeTable& primes, u64 N, u64 q, u64 a)
{
    if (q < 1 || a >= q) {
        throw InputError("theta_progression: need q >= 1 and 0 <= a < q");
    }
    if (N > primes.limit()) {
        throw InputError("theta_progression: N beyond prime table");
    }
    CompensatedSum s;
    for (u32 p : primes.primes()) {
        if (p > N) {
            break;
        }
        if (p % q == a) {
            s += std::log(static_cast<double>(p));
        }
    }
    return s.value();
}

inline double theta_progression(u64 N, u64 q, u64 a)
{
    return theta_progression(sieve_primes(std::max<u64>(N, 2)), N, q, a);
}

struct LevelProbeReport {
    u64 N = 0;
    u64 Q = 0;
    double A = 1.0;
    std::vector<double> errors; // errors[q-1] = max_{(a,q)=1} |Θ(N;q,a) - N/φ(q)|
    double total = 0.0;
    double normalized = 0.0; // total (log N)^A / N
};

inline void to_json(nlohmann::json& j, const LevelProbeReport& r)
{
    j = {{"schema_version", kSchemaVersion},
         {"report", "level_probe"},
         {"N", r.N},
         {"Q", r.Q},
         {"A", r.A},
         {"total", r.total},
         {"normalized", r.normalized},
         {"errors", r.errors}};
}

inline u64 euler_phi(u64 q)
{
    u64 r = q;
    for (const auto& pp : factorize_trial(q)) {
        r = r / pp.prime * (pp.prime - 1);
    }
    return r;
}

// Per-q class sums Θ(N;q,a) for all a, one pass over the primes per q.
inline std::vector<double> progression_sums(std::span<const u32> primes_to_n, u64 q)
{
    std::vector<CompensatedSum> acc(q);
    for (u32 p : primes_to_n) {
        acc[p % q] += std::log(static_cast<double>(p));
    }
    std::vector<double> out(q);
    for (u64 a = 0; a < q; ++a) {
        out[a] = acc[a].value();
    }
    return out;
}

// Σ_{q<=Q} max_{(a,q)=1} |Θ(N;q,a) - N/φ(q)|.
inline LevelProbeReport bv_sum(const PrimeTable& primes, u64 N, u64 Q, double A = 1.0)
{
    if (Q < 1 || Q > N) {
        throw InputError("bv_sum: need 1 <= Q <= N");
    }
    if (N > primes.limit()) {
        throw InputError("bv_sum: N beyond prime table");
    }
    Budget::require_memory(16.0L * static_cast<long double>(Q) * std::min<u64>(Threads::count(), Q),
                           "bv_sum class accumulators");
    const auto all = primes.primes();
    const auto upto = all.subspan(0, primes.pi(N));
    // Logs are shared by every q.
    LevelProbeReport r;
    r.N = N;
    r.Q = Q;
    r.A = A;
    r.errors.assign(Q, 0.0);
    parallel_for(Q, [&](std::size_t qi) {
        const u64 q = qi + 1;
        const auto sums = progression_sums(upto, q);
        const double expected = static_cast<double>(N) / static_cast<double>(euler_phi(q));
        double worst = 0.0;
        for (u64 a = 0; a < q; ++a) {
            if (std::gcd(a, q) != 1) {
                continue;
            }
            worst = std::max(worst, std::fabs(sums[a] - expected));
        }
        r.errors[qi] = worst;
    });
    CompensatedSum t;
    for (double e : r.errors) {
        t += e;
    }
    r.total = t.value();
    const double log_n = std::log(static_cast<double>(N));
    r.normalized = r.total * std::pow(log_n, A) / static_cast<double>(N);
    return r;
}

inline LevelProbeReport bv_sum(u64 N, u64 Q, double A = 1.0)
{
    return bv_sum(sieve_primes(std::max<u64>(N, 2)), N, Q, A);
}

// bv_sum at Q = floor(N^α) for each α.
inline std::vector<LevelProbeReport> level_probe(u64 N, std::span<const double> alphas, double A = 1.0)
{
    for (double a : alphas) {
        if (!(a > 0 && a < 1)) {
            throw InputError("level_probe: every alpha must lie in (0, 1)");
        }
    }
    const auto primes = sieve_primes(std::max<u64>(N, 2));
    std::vector<LevelProbeReport> out;
    for (double a : alphas) {
        const u64 Q = std::max<u64>(1, static_cast<u64>(std::floor(std::pow(static_cast<double>(N), a) + 1e-9)));
        out.push_back(bv_sum(primes, N, Q, A));
    }
    return out;
}

} // namespace tuplesieve

#endif // TUPLESIEVE_DISTRIBUTION_HPP
