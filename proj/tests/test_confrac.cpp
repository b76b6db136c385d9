#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "poncelet/confrac.hpp"
#include "poncelet/sampling.hpp"

namespace {

using namespace poncelet;

const double golden = (std::sqrt(5.0) - 1.0) / 2.0;

// Sum of reciprocal Fibonacci numbers to 22 digits.
constexpr double F_reference = 3.3598856662431775532;
// K_eps at eps = 0.5 and 0.1, and the eps -> 0 limit, evaluated in multiprecision from F_reference.
constexpr double K_half = 3.899510752249104e-10;
constexpr double K_tenth = 1.304445386754597e-9;
constexpr double K_limit = 1.753370028095075e-9;

TEST(CfExpand, GoldenMeanFibonacci) {
    const auto cf = cf_expand(golden, 30);
    ASSERT_EQ(cf.size(), 30u);
    EXPECT_EQ(cf.a0, 0);
    for (const auto& a : cf.partial_quotients) {
        EXPECT_EQ(a, 1);
    }
    BigInt f1 = 1;
    BigInt f2 = 1;
    EXPECT_EQ(cf[0].q, 1);
    for (std::size_t n = 1; n < cf.size(); ++n) {
        EXPECT_EQ(cf[n].q, f2) << n;
        BigInt next = f1 + f2;
        f1 = f2;
        f2 = next;
    }
}

TEST(CfExpand, ExactRationalTerminates) {
    const auto cf = cf_expand(Rational{355, 113}, 10);
    EXPECT_TRUE(cf.terminated);
    EXPECT_EQ(cf.a0, 3);
    ASSERT_EQ(cf.partial_quotients.size(), 2u);
    EXPECT_EQ(cf.partial_quotients[0], 7);
    EXPECT_EQ(cf.partial_quotients[1], 16);
    EXPECT_EQ(cf[0].value(), Rational(3));
    EXPECT_EQ(cf[1].value(), Rational(22, 7));
    EXPECT_EQ(cf[2].value(), Rational(355, 113));
}

TEST(CfExpand, NegativeRationalUsesFloor) {
    const auto cf = cf_expand(Rational{-7, 3}, 10);
    EXPECT_EQ(cf.a0, -3);
    EXPECT_EQ(cf.convergents.back().value(), Rational(-7, 3));
}

TEST(CfExpand, DeterminantAndParity) {
    std::mt19937_64 rng{8};
    for (int i = 0; i < 50; ++i) {
        const double x = uniform_open_dyadic(rng);
        const auto cf = cf_expand(x, 40, Exhaustion::truncate);
        const Rational exact = exact_rational(x);
        for (std::size_t n = 1; n < cf.size(); ++n) {
            const BigInt det = cf[n].p * cf[n - 1].q - cf[n - 1].p * cf[n].q;
            EXPECT_EQ(det, n % 2 == 1 ? BigInt(1) : BigInt(-1));
            if (n >= 2) {
                EXPECT_GT(cf[n].q, cf[n - 1].q);
            }
            if (n % 2 == 0) {
                EXPECT_LE(cf[n].value(), exact);
            } else {
                EXPECT_GE(cf[n].value(), exact);
            }
        }
    }
}

TEST(CfExpand, FloatingExhaustionPolicy) {
    EXPECT_THROW(cf_expand(golden, 200), PrecisionExhausted);
    const auto cf = cf_expand(golden, 200, Exhaustion::truncate);
    EXPECT_TRUE(cf.precision_limited);
    EXPECT_GT(cf.size(), 30u);
    EXPECT_LT(cf.size(), 200u);
    EXPECT_THROW(cf_expand(golden, 0), InvalidConfig);
}

TEST(CfExpand, LargeQuotientsStayExact) {
    const Rational x = Rational{1} / Rational{BigInt{"100000000000000000000000000001"}};
    const auto cf = cf_expand(x, 5);
    EXPECT_TRUE(cf.terminated);
    EXPECT_EQ(to_string(cf.partial_quotients.at(0)), "100000000000000000000000000001");
}

TEST(GaussMap, Examples) {
    EXPECT_EQ(gauss_map(0.0), 0.0);
    EXPECT_EQ(gauss_map(Rational{2, 5}), Rational(1, 2));
    EXPECT_NEAR(gauss_map(0.4), 0.5, 1e-15);
    EXPECT_NEAR(gauss_map(golden), golden, 1e-15);
    EXPECT_THROW(gauss_map(1.0), InvalidConfig);
    EXPECT_THROW(gauss_map(-0.1), InvalidConfig);
}

TEST(Fibonacci, PartialSumOfSixTerms) {
    EXPECT_NEAR(fibonacci_partial_sum(6), 379.0 / 120.0, 1e-15);
}

TEST(Fibonacci, ConstantStable) {
    const double a = fibonacci_reciprocal_sum(1e-15);
    const double b = fibonacci_reciprocal_sum(1e-18);
    EXPECT_LT(std::abs(a - b), 1e-15);
    EXPECT_NEAR(fibonacci_constant(), F_reference, 1e-15);
    EXPECT_THROW(fibonacci_reciprocal_sum(0.0), InvalidConfig);
}

TEST(Remainder, GoldenMean) {
    const auto series = remainder_series(golden, 10);
    ASSERT_EQ(series.records.size(), 10u);
    EXPECT_EQ(series.expansion[10].q, 89);
    for (const auto& rec : series.records) {
        EXPECT_LE(std::abs(rec.remainder), fibonacci_constant());
    }
    EXPECT_EQ(series.violations, 0u);
}

TEST(Remainder, RandomSamplesWithinF) {
    std::mt19937_64 rng{42};
    for (int i = 0; i < 100; ++i) {
        const auto series = remainder_series(uniform_open_dyadic(rng), 25);
        EXPECT_EQ(series.violations, 0u);
        EXPECT_FALSE(series.records.empty());
    }
}

// R(n, x) = log(1 + q_{n-1} T^n(x) / q_n), from x T(x) ... T^{n-1}(x) = 1 / (q_n + q_{n-1} T^n(x)).
TEST(Remainder, ClosedFormOracle) {
    std::mt19937_64 rng{43};
    for (int i = 0; i < 30; ++i) {
        const auto series = remainder_series(uniform_open_dyadic(rng), 25);
        for (const auto& rec : series.records) {
            const double ratio = Rational{series.expansion[rec.n - 1].q, series.expansion[rec.n].q}.convert_to<double>();
            const double expected = std::log1p(ratio * std::exp(rec.log_gauss_point));
            EXPECT_NEAR(rec.remainder, expected, 1e-9);
            EXPECT_GE(rec.remainder, -1e-9);
            EXPECT_LE(rec.remainder, std::log(2.0) + 1e-9);
        }
    }
}

TEST(Remainder, RejectsOutsideUnitInterval) {
    EXPECT_THROW(remainder_series(0.0, 5), InvalidConfig);
    EXPECT_THROW(remainder_series(1.0, 5), InvalidConfig);
}

TEST(KEpsilon, ValuesAndLimit) {
    EXPECT_NEAR(k_epsilon(0.5) / K_half, 1.0, 1e-12);
    EXPECT_NEAR(k_epsilon(0.1) / K_tenth, 1.0, 1e-12);
    EXPECT_LT(k_epsilon(0.5), K_limit);
    EXPECT_NEAR(k_epsilon(1e-13), second_order_bound(1.0), 1e-12);
    EXPECT_NEAR(second_order_bound(1.0) / K_limit, 1.0, 1e-12);
    EXPECT_THROW(k_epsilon(0.0), InvalidConfig);
    EXPECT_THROW(k_epsilon(1.0), InvalidConfig);
}

TEST(KEpsilon, DecreasingInEpsilon) {
    double prev = k_epsilon(1e-6);
    for (double eps = 0.05; eps < 1.0; eps += 0.05) {
        const double cur = k_epsilon(eps);
        EXPECT_LT(cur, prev) << eps;
        prev = cur;
    }
}

TEST(BalancedPairs, GoldenMeanEveryIndex) {
    const auto pairs = find_balanced_pairs(golden, 0.5, 20);
    ASSERT_EQ(pairs.size(), 20u);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        EXPECT_EQ(pairs[i].index, i + 1);
        EXPECT_TRUE(pairs[i].gap_flag);
    }
    EXPECT_NEAR(pairs.back().ratio, (1.0 + std::sqrt(5.0)) / 2.0, 1e-8);
}

TEST(BalancedPairs, ExactGapInequality) {
    std::mt19937_64 rng{9};
    for (double eps : {0.1, 0.5}) {
        const Rational k = exact_rational(k_epsilon(eps));
        for (int i = 0; i < 20; ++i) {
            const double x = uniform_open_dyadic(rng);
            const Rational exact = exact_rational(x);
            for (const auto& pair : find_balanced_pairs(x, eps, 25)) {
                EXPECT_GE(pair.excess.value(), exact);
                EXPECT_LE(pair.defect.value(), exact);
                const Rational inv = Rational{1, pair.excess.q} + Rational{1, pair.defect.q};
                const bool holds = pair.excess.value() - pair.defect.value() >= k * inv * inv;
                EXPECT_EQ(holds, pair.gap_flag);
                EXPECT_TRUE(holds);
            }
        }
    }
}

TEST(BalancedPairs, WindowExcludesLargeQuotients) {
    // x = [0; 1, 10^6, 1, ...]: the ratio q_2 / q_1 = 10^6 exceeds the window.
    const double x = 1.0 / (1.0 + 1.0 / (1e6 + 1.0 / (1.0 + golden)));
    for (const auto& pair : find_balanced_pairs(x, 0.1, 6)) {
        EXPECT_NE(pair.index, 1u);
    }
}

} // namespace
