// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tuplesieve.hpp"

using namespace tuplesieve;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_limit_s > 0 && secs > time_limit_s) {
        o.pass = false;
        o.detail += " [runtime " + std::to_string(secs) + " s exceeds " + std::to_string(time_limit_s) + " s]";
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %2d  %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b)
{
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Relative error measured against max(|want|, term mass).
double rel_err(double got, double want, double mass)
{
    return std::fabs(got - want) / std::max({std::fabs(want), mass, 1e-300});
}

u64 tau_direct(u64 n)
{
    u64 c = 0;
    for (u64 d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            c += d * d == n ? 1 : 2;
        }
    }
    return c;
}

// Q1 two ways for one (H, R): squared Selberg-type weights, and the rescaled
// squared ℓ = 1 tuple weights. Returns {q1, q1_via_gpy, worst pointwise}.
struct Q1Pair {
    double selberg = 0;
    double via_gpy = 0;
    double pointwise = 0;
    std::vector<double> bits;
};

Q1Pair q1_identity(const Tuple& H, double R, i64 n_max)
{
    const auto s = selberg_weight_interval(H, 0, n_max, R);
    const auto g = gpy_weight_interval(H, 1, 0, n_max, R);
    const int k = H.k();
    const double log_r = std::log(R);
    // (k+1)! / (log R)^{k+1}
    const double c = std::exp(std::lgamma(k + 2.0) - (k + 1) * std::log(log_r));
    CompensatedSum a;
    CompensatedSum b;
    double worst = 0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        a += s.values[i] * s.values[i];
        b += g.values[i] * g.values[i];
        const double lhs = s.values[i];
        const double rhs = c * g.values[i];
        worst = std::max(worst, std::fabs(lhs - rhs) / std::max(std::fabs(lhs), 1.0));
    }
    Q1Pair out;
    out.selberg = a.value();
    out.via_gpy = c * c * b.value();
    out.pointwise = worst;
    out.bits = s.values;
    out.bits.insert(out.bits.end(), g.values.begin(), g.values.end());
    out.bits.push_back(out.selberg);
    out.bits.push_back(out.via_gpy);
    return out;
}

struct CorrValues {
    std::vector<double> ratios; // pair ΛRΛR, pair ΛΛR, self ΛR², self ΛΛR
    std::vector<double> bits;
};

CorrValues correlation_ratios(i64 N)
{
    const double R = std::pow(static_cast<double>(N), 0.25);
    const auto pair = corr_pair(N, R, 2);
    const auto self = corr_self(N, R);
    CorrValues v;
    for (const auto* r : {&pair, &self}) {
        for (const auto& m : r->measurements) {
            v.ratios.push_back(*m.ratio);
            v.bits.push_back(m.empirical);
            v.bits.push_back(*m.predicted_main);
        }
    }
    return v;
}

std::vector<double> second_moment_bits(i64 N)
{
    const auto r = second_moment(N, 1.0);
    std::vector<double> out;
    for (const auto& m : r.measurements) {
        out.push_back(m.empirical);
        out.push_back(m.predicted_main.value_or(0.0));
    }
    return out;
}

} // namespace

int main()
{
    std::printf("tuplesieve acceptance run, %u worker threads by default\n", Threads::count());

    criterion(1, "truncated von Mangoldt equals von Mangoldt for 1 < n <= R, R = 1e4", 5, [] {
        const double R = 1e4;
        const auto t = lambda_R_interval(0, 10000, R);
        const double tol = 1e-9 * std::log(R);
        double worst = 0;
        for (i64 n = 2; n <= 10000; ++n) {
            worst = std::max(worst, std::fabs(t.at(n) - oracle::mangoldt(static_cast<u64>(n))));
        }
        return Outcome{worst <= tol, "max |Λ_R - Λ| = " + num(worst) + " (tol " + num(tol) + ")"};
    });

    criterion(2, "Q1 from Selberg weights equals rescaled sum of squared tuple weights", 30, [] {
        Outcome o{true, ""};
        for (const auto& H : {Tuple{0, 2}, Tuple{0, 4, 6, 10, 12, 16}}) {
            for (double R : {30.0, 300.0}) {
                const auto q = q1_identity(H, R, 10000);
                const double rel = std::fabs(q.selberg - q.via_gpy) / q.selberg;
                o.pass = o.pass && rel <= 1e-9;
                o.detail += "H={" + H.to_string() + "} R=" + num(R) + " rel=" + num(rel) + " pointwise=" + num(q.pointwise) + "; ";
            }
        }
        return o;
    });

    criterion(3, "every weight kind matches direct divisor enumeration at 1000 random n", 60, [] {
        std::mt19937_64 rng(20240611);
        const i64 top = 1000000;
        std::vector<i64> ns(1000);
        for (auto& n : ns) {
            n = 1 + static_cast<i64>(rng() % static_cast<u64>(top));
        }
        const Tuple H{0, 2, 6, 8};
        std::vector<std::pair<i64, i64>> f1{{1, 0}};
        std::vector<std::pair<i64, i64>> fH;
        for (i64 h : H.offsets()) {
            fH.emplace_back(1, h);
        }
        const double R = 1000;
        const double lr = std::log(R);
        const auto lam = lambda_R_interval(0, top, R);
        const auto gpy = gpy_weight_interval(H, 2, 0, top, R);
        const auto sel = selberg_weight_interval(H, 0, top, R);
        const double R_low = 200; // the λ_R oracle is quadratic in R
        const auto low = lambda_lower_R_interval(0, top, R_low);
        const int e = H.k() + 2;
        const double fact = std::tgamma(e + 1.0);
        const auto c_lam = [&](u64 d, int m) { return m * (lr - std::log(static_cast<double>(d))); };
        const auto c_gpy = [&](u64 d, int m) { return m * std::pow(lr - std::log(static_cast<double>(d)), e) / fact; };
        const auto c_sel = [&](u64 d, int m) { return m * std::pow(1 - std::log(static_cast<double>(d)) / lr, H.k() + 1); };
        double w[4] = {0, 0, 0, 0};
        for (i64 n : ns) {
            w[0] = std::max(w[0], rel_err(lam.at(n), oracle::divisor_sum(f1, n, R, c_lam), oracle::divisor_mass(f1, n, R, c_lam)));
            w[1] = std::max(w[1], rel_err(low.at(n), oracle::lambda_lower(static_cast<u64>(n), R_low), 0.0));
            w[2] = std::max(w[2], rel_err(gpy.at(n), oracle::divisor_sum(fH, n, R, c_gpy), oracle::divisor_mass(fH, n, R, c_gpy)));
            w[3] = std::max(w[3], rel_err(sel.at(n), oracle::divisor_sum(fH, n, R, c_sel), oracle::divisor_mass(fH, n, R, c_sel)));
        }
        const bool ok = w[0] <= 1e-9 && w[1] <= 1e-9 && w[2] <= 1e-9 && w[3] <= 1e-9;
        return Outcome{ok, "worst rel: Lambda_R " + num(w[0]) + ", lambda_R " + num(w[1]) + ", tuple " + num(w[2]) +
                               ", Selberg " + num(w[3])};
    });

    criterion(4, "singular series: twin constant, trivial tuple, inadmissible tuple", 5, [] {
        const auto v = singular_series(Tuple{0, 2}, 1e-9);
        const auto iv = oracle::twin_constant(60000000);
        const double mid = static_cast<double>((iv.lo + iv.hi) / 2);
        const double half = static_cast<double>((iv.hi - iv.lo) / 2);
        const double err = std::fabs(v.value - mid) + half;
        const bool one = singular_series(Tuple{0}, 1e-9).value == 1.0;
        const bool zero = singular_series(Tuple{0, 2, 4}, 1e-9).value == 0.0 &&
                          singular_series(Tuple{0, 1}, 1e-9).value == 0.0;
        return Outcome{err <= 1e-8 && one && zero,
                       "S({0,2}) = " + num(v.value) + ", oracle interval [" + num(static_cast<double>(iv.lo)) + ", " +
                           num(static_cast<double>(iv.hi)) + "], worst deviation " + num(err) +
                           (one ? ", S({0}) = 1" : ", S({0}) != 1") + (zero ? ", inadmissible = 0" : ", inadmissible != 0")};
    });

    criterion(5, "narrowest admissible 6-tuple with exhaustive optimality certificate", 60, [] {
        const auto t = narrowest_admissible(6, 100);
        if (!t) {
            return Outcome{false, "no tuple found"};
        }
        // Certificate: no admissible 6-subset of [0, 15] contains 0, and the
        // found tuple is admissible by the independent check.
        u64 checked = 0;
        bool narrower = false;
        for (u32 mask = 0; mask < (1u << 15); ++mask) {
            if (__builtin_popcount(mask) != 5) {
                continue;
            }
            std::vector<i64> v{0};
            for (int i = 0; i < 15; ++i) {
                if (mask & (1u << i)) {
                    v.push_back(i + 1);
                }
            }
            ++checked;
            narrower = narrower || oracle::admissible(v);
        }
        const bool ok = t->to_string() == "0,4,6,10,12,16" && t->diameter() == 16 && !narrower &&
                        oracle::admissible(std::vector<i64>(t->offsets().begin(), t->offsets().end()));
        return Outcome{ok, "found {" + t->to_string() + "}, diameter " + std::to_string(t->diameter()) + "; " +
                               std::to_string(checked) + " candidates of diameter <= 15 checked, " +
                               (narrower ? "an admissible one exists" : "none admissible")};
    });

    criterion(6, "correlation ratios at N = 1e6, R = N^(1/4): band [0.75, 1.25] and trend vs N = 1e4", 300, [] {
        const auto big = correlation_ratios(1000000);
        const auto small = correlation_ratios(10000);
        const char* names[] = {"pair LR*LR", "pair L*LR", "self LR^2", "self L*LR"};
        Outcome o{true, ""};
        for (std::size_t i = 0; i < 4; ++i) {
            const bool band = big.ratios[i] >= 0.75 && big.ratios[i] <= 1.25;
            const bool trend = std::fabs(big.ratios[i] - 1) <= std::fabs(small.ratios[i] - 1);
            o.pass = o.pass && band && trend;
            o.detail += std::string(names[i]) + " " + num(big.ratios[i]) + " (1e4: " + num(small.ratios[i]) + ")" +
                        (band ? "" : " OUT OF BAND") + (trend ? "" : " TREND VIOLATED") + "; ";
        }
        return o;
    });

    criterion(7, "twin-prime count to 1e6: exact versus sieve oracle, within 5% of prediction", 30, [] {
        const auto r = hardy_littlewood_count(Tuple{0, 2}, 1000000);
        const auto ps = oracle::primes_upto(1000002);
        std::vector<bool> is_p(1000003, false);
        for (u64 p : ps) {
            is_p[p] = true;
        }
        u64 count = 0;
        for (u64 n = 1; n <= 1000000; ++n) {
            count += (is_p[n] && is_p[n + 2]) ? 1 : 0;
        }
        const auto& m = r.get("prime_tuples");
        const bool exact = m.empirical == static_cast<double>(count);
        const bool near = std::fabs(*m.ratio - 1) <= 0.05;
        return Outcome{exact && near, "library " + num(m.empirical) + ", oracle " + std::to_string(count) +
                                          ", predicted " + num(*m.predicted_main) + ", ratio " + num(*m.ratio)};
    });

    criterion(8, "Gallagher average: k = 2, h = 100 ratio in [0.90, 1.10]; k = 1 equals h", 60, [] {
        const auto g = gallagher_average(2, 100);
        const auto g1 = gallagher_average(1, 100);
        const bool ok = g.ordered_ratio >= 0.9 && g.ordered_ratio <= 1.1 && g1.ordered_sum == 100.0;
        return Outcome{ok, "k=2 ordered ratio " + num(g.ordered_ratio) + " (set ratio " + num(g.set_ratio) +
                               "), k=1 sum " + num(g1.ordered_sum)};
    });

    criterion(9, "second moment at N = 1e6, lambda = 1: ratio in [0.8, 1.2]", 120, [] {
        const auto r = second_moment(1000000, 1.0);
        const double ratio = *r.ratio();
        return Outcome{ratio >= 0.8 && ratio <= 1.2,
                       "h = " + r.parameters["h"].dump() + ", empirical " + num(r.empirical()) + ", predicted " +
                           num(*r.predicted_main()) + ", ratio " + num(ratio) + ", first moment " +
                           num(r.get("first_moment").empirical)};
    });

    criterion(10, "Heath-Brown form, rho = 1/14, x = 1e5: no false witnesses", 120, [] {
        const auto r = heathbrown_Q({{1, 0}, {1, 2}}, 1.0 / 14, 100000, std::pow(1e5, 0.25));
        u64 bad = 0;
        for (const auto& w : r.witnesses) {
            const u64 n = static_cast<u64>(w.n);
            bad += tau_direct(n) + tau_direct(n + 2) < 14 ? 0 : 1;
        }
        const bool ok = bad == 0 && !r.witnesses.empty() && r.witness_events == r.witnesses.size();
        return Outcome{ok, std::to_string(r.witnesses.size()) + " witnesses, " + std::to_string(bad) +
                               " false; Q = " + num(r.total) + ", Q1 = " + num(r.component("Q1")) +
                               ", Q2 = " + num(r.component("Q2"))};
    });

    criterion(11, "E2 numbers to 1e6: run 33,34,35; more than 1000 gaps <= 6, nondecreasing", 30, [] {
        const auto t = e2_sieve(1000000);
        const bool run = std::binary_search(t.values.begin(), t.values.end(), 33) &&
                         std::binary_search(t.values.begin(), t.values.end(), 34) &&
                         std::binary_search(t.values.begin(), t.values.end(), 35);
        u64 prev = 0;
        bool monotone = true;
        std::string counts;
        for (u64 lim : {1000ull, 10000ull, 100000ull, 1000000ull}) {
            const auto s = e2_gap_stats(lim, 1);
            monotone = monotone && s.small_gap_count >= prev;
            prev = s.small_gap_count;
            counts += std::to_string(lim) + ":" + std::to_string(s.small_gap_count) + " ";
        }
        return Outcome{run && prev > 1000 && monotone,
                       std::string(run ? "run present" : "run missing") + "; gaps <= 6 by limit " + counts};
    });

    criterion(12, "progression partition identity at N = 1e5; level probe matches brute force", 60, [] {
        const u64 N = 100000;
        const auto primes = sieve_primes(N);
        CompensatedSum th;
        for (u32 p : primes.primes()) {
            th += std::log(static_cast<double>(p));
        }
        const double theta = th.value();
        double worst = 0;
        for (u64 q = 1; q <= 100; ++q) {
            const auto sums = progression_sums(primes.primes(), q);
            CompensatedSum s;
            for (double v : sums) {
                s += v;
            }
            worst = std::max(worst, std::fabs(s.value() - theta));
        }
        // Probe at N = 1e4, Q = 100 against per-class brute force.
        const u64 n2 = 10000;
        const auto probe = bv_sum(n2, 100);
        const auto ps = oracle::primes_upto(n2);
        double probe_worst = 0;
        for (u64 q = 1; q <= 100; ++q) {
            double best = 0;
            for (u64 a = 0; a < q; ++a) {
                if (std::gcd(a, q) != 1) {
                    continue;
                }
                double s = 0;
                for (u64 p : ps) {
                    s += p % q == a ? std::log(static_cast<double>(p)) : 0.0;
                }
                best = std::max(best, std::fabs(s - static_cast<double>(n2) / static_cast<double>(oracle::phi(q))));
            }
            probe_worst = std::max(probe_worst, std::fabs(probe.errors[q - 1] - best));
        }
        const bool ok = worst == 0.0 && probe_worst <= 1e-9 * static_cast<double>(n2);
        return Outcome{ok, "partition max |diff| = " + num(worst) + " (theta " + num(theta) +
                               "); probe max per-q deviation " + num(probe_worst)};
    });

    criterion(13, "criteria 2, 6, 9 bit-identical with 1, 2 and 8 worker threads", 0, [] {
        std::vector<std::vector<double>> runs;
        for (unsigned t : {1u, 2u, 8u}) {
            Threads::set(t);
            std::vector<double> bits;
            for (const auto& H : {Tuple{0, 2}, Tuple{0, 4, 6, 10, 12, 16}}) {
                for (double R : {30.0, 300.0}) {
                    const auto q = q1_identity(H, R, 10000);
                    bits.insert(bits.end(), q.bits.begin(), q.bits.end());
                }
            }
            for (i64 N : {10000, 1000000}) {
                const auto c = correlation_ratios(N);
                bits.insert(bits.end(), c.bits.begin(), c.bits.end());
            }
            const auto m = second_moment_bits(1000000);
            bits.insert(bits.end(), m.begin(), m.end());
            runs.push_back(std::move(bits));
        }
        Threads::set(0);
        const bool ok = same_bits(runs[0], runs[1]) && same_bits(runs[0], runs[2]);
        return Outcome{ok, std::to_string(runs[0].size()) + " values compared across thread counts"};
    });

    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
