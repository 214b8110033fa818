#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tuplesieve/detector.hpp"
#include "tuplesieve/parallel.hpp"

using namespace tuplesieve;

namespace {

double psi_window(i64 n, i64 h)
{
    double s = 0;
    for (i64 m = n + 1; m <= n + h; ++m) {
        s += oracle::mangoldt(static_cast<u64>(m));
    }
    return s;
}

double psi_r_window(i64 n, i64 h, double R)
{
    const double lr = std::log(R);
    double s = 0;
    for (i64 m = n + 1; m <= n + h; ++m) {
        s += oracle::divisor_sum({{1, 0}}, m, R, [&](u64 d, int mu) { return mu * (lr - std::log(static_cast<double>(d))); });
    }
    return s;
}

} // namespace

TEST(FirstMoment, ComponentsMatchNaiveAndRecombine)
{
    const i64 N = 4000;
    const double R = 40;
    const auto r = first_moment_gap(N, 1.0, R);
    const i64 h = r.parameters["h"].get<i64>();
    double a2 = 0, ab = 0, b2 = 0, d2 = 0;
    for (i64 n = N + 1; n <= 2 * N; ++n) {
        const double a = psi_window(n, h);
        const double b = psi_r_window(n, h, R);
        a2 += a * a;
        ab += a * b;
        b2 += b * b;
        d2 += (a - b) * (a - b);
    }
    EXPECT_NEAR(r.component("psi_squared"), a2, 1e-9 * a2);
    EXPECT_NEAR(r.component("psi_psiR"), ab, 1e-9 * a2);
    EXPECT_NEAR(r.component("psiR_squared"), b2, 1e-9 * a2);
    EXPECT_NEAR(r.component("direct_square_sum"), d2, 1e-9 * a2);
    // The expansion and the direct square agree, and the square is nonnegative.
    EXPECT_NEAR(r.total, r.component("direct_square_sum"), 1e-9 * a2);
    EXPECT_GE(r.component("direct_square_sum"), 0.0);
    EXPECT_DOUBLE_EQ(r.total, r.recombined());
    EXPECT_THROW(first_moment_gap(N, 1.0, 100.0), InputError);
    EXPECT_THROW(first_moment_gap(N, 0.0, 10.0), InputError);
}

TEST(FirstMoment, ThresholdFlag)
{
    const auto lo = first_moment_gap(10000, 0.4, 50);
    const auto hi = first_moment_gap(10000, 1.0, 50);
    // λ̂/2 + λ̂² > λ̂ exactly when λ̂ > 1/2.
    EXPECT_EQ(lo.flags["threshold_exceeded"], lo.parameters["lambda_hat"].get<double>() > 0.5);
    EXPECT_EQ(hi.flags["threshold_exceeded"], true);
}

TEST(Mollified, WitnessesAreGenuine)
{
    const i64 N = 20000;
    const auto r = mollified_moment(N, 1.0, 100, 1.01, 0.0);
    EXPECT_DOUBLE_EQ(r.total, r.component("prime_mass") - r.component("penalty"));
    if (r.flags["positive"].get<bool>()) {
        EXPECT_GT(r.witness_events, 0u);
        const i64 h = r.parameters["h"].get<i64>();
        for (const auto& w : r.witnesses) {
            EXPECT_TRUE(w.verified);
            EXPECT_GE(psi_window(w.n, h), 2 * std::log(static_cast<double>(N)) - 1e-9);
        }
    }
    const auto none = mollified_moment(N, 1.0, 100, 0.5, 0.0);
    EXPECT_TRUE(none.witnesses.empty());
    const auto capped = mollified_moment(N, 1.0, 100, 1.01, 0.0, 3);
    EXPECT_LE(capped.witnesses.size(), 3u);
    EXPECT_EQ(capped.witness_events, r.witness_events);
}

TEST(GpyForm, MatchesNaiveForTinyCase)
{
    const i64 N = 400;
    const i64 h = 4;
    const int k = 2;
    const int ell = 1;
    const double R = 15;
    const auto rep = gpy_form(N, h, k, ell, 1, R);
    EXPECT_EQ(rep.parameters["subsets"], 6);
    const double lr = std::log(R);
    double pm = 0, sq = 0;
    for (i64 n = N + 1; n <= 2 * N; ++n) {
        double w = 0;
        for (i64 a = 1; a <= h; ++a) {
            for (i64 b = a + 1; b <= h; ++b) {
                w += oracle::divisor_sum({{1, a}, {1, b}}, n, R, [&](u64 d, int mu) {
                    return mu * std::pow(lr - std::log(static_cast<double>(d)), 3) / 6.0;
                });
            }
        }
        double t = 0;
        for (i64 m = n + 1; m <= n + h; ++m) {
            t += oracle::is_prime(static_cast<u64>(m)) ? std::log(static_cast<double>(m)) : 0.0;
        }
        pm += t * w * w;
        sq += w * w;
    }
    EXPECT_NEAR(rep.component("prime_mass"), pm, 1e-9 * pm);
    EXPECT_NEAR(rep.component("weight_square_mass"), sq, 1e-9 * sq);
    for (const auto& w : rep.witnesses) {
        int c = 0;
        for (i64 m = w.n + 1; m <= w.n + h; ++m) {
            c += oracle::is_prime(static_cast<u64>(m)) ? 1 : 0;
        }
        EXPECT_GE(c, 2);
    }
    EXPECT_THROW(gpy_form(N, 60, 5, 1, 1, R), ResourceError);
}

TEST(GsSingle, WitnessesArePrimePairs)
{
    const auto rep = gs_single_tuple(Tuple{0, 2, 6}, 1, 1, 20000, 100);
    EXPECT_GT(rep.witness_events, 0u);
    for (const auto& w : rep.witnesses) {
        int c = 0;
        for (i64 h : {0, 2, 6}) {
            c += oracle::is_prime(static_cast<u64>(w.n + h)) ? 1 : 0;
        }
        EXPECT_GE(c, 2) << w.n;
    }
    const auto bad = gs_single_tuple(Tuple{0, 2, 4}, 1, 1, 1000, 10);
    EXPECT_FALSE(bad.flags["admissible"].get<bool>());
    EXPECT_FALSE(bad.warnings.empty());
}

TEST(HeathBrown, ComponentsAndWitnesses)
{
    const std::vector<LinearForm> forms{{1, 0}, {1, 2}};
    const i64 x = 3000;
    const double R = 50;
    const double rho = 0.2;
    const auto rep = heathbrown_Q(forms, rho, x, R);
    const double lr = std::log(R);
    double q1 = 0, q2 = 0;
    for (i64 n = 1; n <= x; ++n) {
        const double w = oracle::divisor_sum({{1, 0}, {1, 2}}, n, R, [&](u64 d, int mu) {
            return mu * std::pow(1 - std::log(static_cast<double>(d)) / lr, 3);
        });
        const double tau = static_cast<double>(oracle::tau(static_cast<u64>(n)) + oracle::tau(static_cast<u64>(n + 2)));
        q1 += w * w;
        q2 += tau * w * w;
    }
    EXPECT_NEAR(rep.component("Q1"), q1, 1e-9 * q1);
    EXPECT_NEAR(rep.component("Q2"), q2, 1e-9 * q2);
    EXPECT_NEAR(rep.total, q1 - rho * q2, 1e-9 * q2);
    // With a_i = 1 the ℓ = 1 GPY weight gives Q1 after rescaling.
    EXPECT_NEAR(rep.component("Q1_via_gpy"), q1, 1e-8 * q1);
    // Σ τ < 1/ρ = 5; beyond n = 1 that forces n and n + 2 both prime.
    for (const auto& w : rep.witnesses) {
        EXPECT_LT(oracle::tau(static_cast<u64>(w.n)) + oracle::tau(static_cast<u64>(w.n + 2)), 5u) << w.n;
        if (w.n > 1) {
            EXPECT_TRUE(oracle::is_prime(static_cast<u64>(w.n)) && oracle::is_prime(static_cast<u64>(w.n + 2))) << w.n;
        }
    }
    EXPECT_GT(rep.witness_events, 0u);
}

TEST(HeathBrown, RejectsBadForms)
{
    EXPECT_THROW(heathbrown_Q({{1, 0}, {2, 0}}, 0.1, 100, 10), InputError);
    EXPECT_THROW(heathbrown_Q({{0, 3}}, 0.1, 100, 10), InputError);
    EXPECT_THROW(heathbrown_Q({{1, -1}}, 0.1, 100, 10), InputError);
    EXPECT_THROW(heathbrown_Q({}, 0.1, 100, 10), InputError);
}

TEST(GapScan, SmallLimits)
{
    const auto g = gap_scan(100, 1);
    EXPECT_EQ(g.gaps.size(), 24u);
    EXPECT_EQ(g.min_gap, 1u);
    EXPECT_EQ(g.gaps.front().p, 2u);
    EXPECT_EQ(g.gaps.back().q, 97u);
    const auto g2 = gap_scan(100000, 2);
    EXPECT_EQ(g2.min_gap, 3u); // 2, 3, 5
    for (std::size_t i = 0; i < 50; ++i) {
        const auto& e = g2.gaps[i];
        EXPECT_NEAR(e.normalized, static_cast<double>(e.q - e.p) / std::log(static_cast<double>(e.p)), 1e-15);
    }
    EXPECT_THROW(gap_scan(10, 1), InputError);
}

TEST(Determinism, DetectorJsonIndependentOfThreads)
{
    std::vector<std::string> dumps;
    for (unsigned t : {1u, 2u, 8u}) {
        Threads::set(t);
        dumps.push_back(nlohmann::json(first_moment_gap(300000, 1.0, 300)).dump());
    }
    Threads::set(0);
    EXPECT_EQ(dumps[0], dumps[1]);
    EXPECT_EQ(dumps[0], dumps[2]);
}
