#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tuplesieve/tuples.hpp"

using namespace tuplesieve;

TEST(Tuple, ParsingAndInvariants)
{
    const auto t = Tuple::parse("16, 0,4,6,10,12");
    EXPECT_EQ(t.to_string(), "0,4,6,10,12,16");
    EXPECT_EQ(t.k(), 6);
    EXPECT_EQ(t.diameter(), 16);
    EXPECT_THROW(Tuple::parse("0,2,2"), InputError);
    EXPECT_THROW(Tuple::parse("0,,2"), InputError);
    EXPECT_THROW(Tuple::parse("0,x"), InputError);
    EXPECT_THROW(Tuple(std::vector<i64>{}), InputError);
    nlohmann::json j = t;
    EXPECT_EQ(j.dump(), "[0,4,6,10,12,16]");
    EXPECT_EQ(j.get<Tuple>(), t);
}

TEST(ResidueCount, Examples)
{
    EXPECT_EQ(residue_count(Tuple{0, 2}, 2), 1);
    EXPECT_EQ(residue_count(Tuple{0, 4, 6, 10, 12, 16}, 5), 4);
    EXPECT_EQ(residue_count(Tuple{0, 1}, 2), 2);
}

TEST(ResidueCount, FullBeyondDiameter)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<i64> v;
        const int k = 1 + static_cast<int>(rng() % 6);
        while (static_cast<int>(v.size()) < k) {
            const i64 x = static_cast<i64>(rng() % 60) - 30;
            if (std::find(v.begin(), v.end(), x) == v.end()) {
                v.push_back(x);
            }
        }
        const Tuple H(v);
        for (u64 p : {61ull, 67ull, 71ull, 101ull}) {
            ASSERT_EQ(residue_count(H, p), k);
        }
    }
}

TEST(Admissible, Examples)
{
    EXPECT_FALSE(is_admissible(Tuple{0, 2, 4}));
    EXPECT_TRUE(is_admissible(Tuple{0, 4, 6, 10, 12, 16}));
    EXPECT_TRUE(is_admissible(Tuple{0}));
    EXPECT_FALSE(is_admissible(Tuple{0, 1}));
}

TEST(SingularSeries, Trivial)
{
    const auto inad = singular_series(Tuple{0, 1}, 1e-6);
    EXPECT_EQ(inad.value, 0.0);
    EXPECT_EQ(inad.truncation_bound, 0.0);
    const auto one = singular_series(Tuple{0}, 1e-6);
    EXPECT_EQ(one.value, 1.0);
    EXPECT_THROW(singular_series(Tuple{0, 2}, 0.0), InputError);
    EXPECT_THROW(singular_series(Tuple{0, 2}, 1e-14), ResourceError);
}

TEST(SingularSeries, TwinConstantAgainstIntervalOracle)
{
    const auto v = singular_series(Tuple{0, 2}, 1e-7);
    EXPECT_LE(v.truncation_bound, 1e-7);
    const auto iv = oracle::twin_constant(20000000);
    // Library interval [value - bound, value] must meet the oracle interval.
    EXPECT_LE(static_cast<long double>(v.value - v.truncation_bound), iv.hi + 1e-15L);
    EXPECT_GE(static_cast<long double>(v.value) + 1e-15L, iv.lo);
    EXPECT_NEAR(v.value, 1.3203236316937391, 1e-7);
}

TEST(SingularSeries, ShiftInvariance)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 15; ++trial) {
        std::vector<i64> v;
        const int k = 2 + static_cast<int>(rng() % 3);
        while (static_cast<int>(v.size()) < k) {
            const i64 x = static_cast<i64>(rng() % 30);
            if (std::find(v.begin(), v.end(), x) == v.end()) {
                v.push_back(x);
            }
        }
        const Tuple H(v);
        const i64 c = static_cast<i64>(rng() % 1000) - 500;
        const auto a = singular_series(H, 1e-5);
        const auto b = singular_series(H.shifted(c), 1e-5);
        EXPECT_EQ(is_admissible(H), is_admissible(H.shifted(c)));
        EXPECT_LE(std::fabs(a.value - b.value), a.truncation_bound + b.truncation_bound + 1e-12);
        EXPECT_EQ(a.value > 0, is_admissible(H));
        EXPECT_EQ(is_admissible(H), oracle::admissible(v));
    }
}

TEST(SingularSeries, HeadMatchesPartialProductOracle)
{
    // With the cutoff known, the value must equal the plain product over
    // p <= cutoff, computed independently.
    const std::vector<i64> H{0, 2, 6};
    const auto v = singular_series(Tuple(H), 1e-4);
    const double partial = oracle::singular_series_partial(H, v.cutoff_prime);
    EXPECT_NEAR(v.value, partial, 1e-11);
    EXPECT_NEAR(v.value, 2.8582485957192, 1e-4); // Hardy-Littlewood triple constant
}

TEST(Gallagher, Trivial)
{
    EXPECT_EQ(gallagher_average(1, 37).ordered_sum, 37.0);
    EXPECT_EQ(gallagher_average(2, 2).ordered_sum, 0.0);
    EXPECT_THROW(gallagher_average(3, 2), InputError);
    EXPECT_THROW(gallagher_average(5, 1000), ResourceError);
}

TEST(Gallagher, MatchesNaiveDoubleLoop)
{
    for (i64 h : {10, 20}) {
        const auto g = gallagher_average(2, h, 1e-7);
        double naive = 0;
        for (i64 a = 1; a <= h; ++a) {
            for (i64 b = 1; b <= h; ++b) {
                if (a != b) {
                    naive += singular_series(Tuple{a, b}, 1e-7).value;
                }
            }
        }
        EXPECT_NEAR(g.ordered_sum, naive, 1e-6 * naive) << h;
        EXPECT_NEAR(g.set_sum * 2, g.ordered_sum, 1e-12 * naive);
    }
}

TEST(Gallagher, PairAverageNearOne)
{
    const auto g = gallagher_average(2, 100);
    EXPECT_GT(g.ordered_ratio, 0.9);
    EXPECT_LT(g.ordered_ratio, 1.1);
    EXPECT_DOUBLE_EQ(g.set_ratio, g.ordered_ratio);
}

TEST(Narrowest, Examples)
{
    EXPECT_EQ(narrowest_admissible(1, 10)->to_string(), "0");
    EXPECT_EQ(narrowest_admissible(2, 10)->to_string(), "0,2");
    EXPECT_EQ(narrowest_admissible(6, 100)->to_string(), "0,4,6,10,12,16");
    EXPECT_FALSE(narrowest_admissible(6, 15).has_value());
    EXPECT_THROW(narrowest_admissible(11, 100), InputError);
}

TEST(Narrowest, KnownDiametersAndCertificate)
{
    // Minimal diameters of admissible k-tuples, k = 2..10.
    const int expect[] = {2, 6, 8, 12, 16, 20, 26, 30, 32};
    for (int k = 2; k <= 10; ++k) {
        const auto t = narrowest_admissible(k, 100);
        ASSERT_TRUE(t);
        EXPECT_EQ(t->diameter(), expect[k - 2]) << k;
        EXPECT_TRUE(is_admissible(*t));
        EXPECT_EQ(t->offsets()[0], 0);
    }
    // Exhaustive check for k = 4: no admissible subset of [0, 7] containing 0.
    for (u32 mask = 0; mask < (1u << 7); ++mask) {
        if (__builtin_popcount(mask) != 3) {
            continue;
        }
        std::vector<i64> v{0};
        for (int i = 0; i < 7; ++i) {
            if (mask & (1u << i)) {
                v.push_back(i + 1);
            }
        }
        EXPECT_FALSE(oracle::admissible(v));
    }
}
