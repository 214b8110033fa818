#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "tuplesieve/distribution.hpp"
#include "tuplesieve/parallel.hpp"

using namespace tuplesieve;

TEST(ThetaProgression, SmallCase)
{
    // Primes <= 100 congruent to 1 mod 4.
    double want = 0;
    for (u64 p : {5, 13, 17, 29, 37, 41, 53, 61, 73, 89, 97}) {
        want += std::log(static_cast<double>(p));
    }
    EXPECT_NEAR(theta_progression(100, 4, 1), want, 1e-12);
    EXPECT_NEAR(theta_progression(100, 1, 0), std::log(2.0) + theta_progression(100, 4, 1) + theta_progression(100, 4, 3), 1e-12);
}

TEST(ThetaProgression, MatchesOracle)
{
    const auto primes = sieve_primes(20000);
    const auto ps = oracle::primes_upto(20000);
    for (u64 q : {3u, 7u, 10u, 30u}) {
        for (u64 a = 0; a < q; ++a) {
            double want = 0;
            for (u64 p : ps) {
                want += p % q == a ? std::log(static_cast<double>(p)) : 0.0;
            }
            EXPECT_NEAR(theta_progression(primes, 20000, q, a), want, 1e-9 * std::max(1.0, want));
        }
    }
}

TEST(Phi, Values)
{
    for (u64 q = 1; q <= 200; ++q) {
        EXPECT_EQ(euler_phi(q), oracle::phi(q));
    }
}

TEST(BvSum, MatchesNaiveMax)
{
    const u64 N = 20000;
    const u64 Q = 20;
    const auto r = bv_sum(N, Q);
    const auto ps = oracle::primes_upto(N);
    double total = 0;
    for (u64 q = 1; q <= Q; ++q) {
        double best = 0;
        for (u64 a = 0; a < q; ++a) {
            if (std::gcd(a, q) != 1) {
                continue;
            }
            double s = 0;
            for (u64 p : ps) {
                s += p % q == a ? std::log(static_cast<double>(p)) : 0.0;
            }
            best = std::max(best, std::fabs(s - static_cast<double>(N) / static_cast<double>(oracle::phi(q))));
        }
        total += best;
    }
    EXPECT_NEAR(r.total, total, 1e-8 * total);
    const double expect_norm = total * std::log(static_cast<double>(N)) / static_cast<double>(N);
    EXPECT_NEAR(r.errors[2], std::fabs(theta_progression(N, 3, 2) - N / 2.0) > std::fabs(theta_progression(N, 3, 1) - N / 2.0)
                                 ? std::fabs(theta_progression(N, 3, 2) - N / 2.0)
                                 : std::fabs(theta_progression(N, 3, 1) - N / 2.0),
                1e-9 * N);
    EXPECT_NEAR(r.normalized, expect_norm, 1e-8 * expect_norm);
}

TEST(LevelProbe, MonotoneInQ)
{
    const std::vector<double> alphas{0.3, 0.4, 0.5};
    const auto reps = level_probe(200000, alphas);
    ASSERT_EQ(reps.size(), 3u);
    for (std::size_t i = 1; i < reps.size(); ++i) {
        EXPECT_GE(reps[i].Q, reps[i - 1].Q);
        EXPECT_GE(reps[i].total, reps[i - 1].total);
    }
}

TEST(Determinism, LevelProbeIndependentOfThreads)
{
    std::vector<std::string> dumps;
    for (unsigned t : {1u, 2u, 8u}) {
        Threads::set(t);
        dumps.push_back(nlohmann::json(bv_sum(300000, 200)).dump());
    }
    Threads::set(0);
    EXPECT_EQ(dumps[0], dumps[1]);
    EXPECT_EQ(dumps[0], dumps[2]);
}
