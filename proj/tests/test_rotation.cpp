#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "poncelet/rotation.hpp"

namespace {

using namespace poncelet;

constexpr double golden = 0.6180339887498949;

// Inner radii of the n-Poncelet pairs for R = 1, c = 0.3, solved to 20 digits in
// multiprecision from the closed-form arc and bisection on g^n(0) - p.
constexpr double r7_p1 = 0.69753289540090216352;
constexpr double r7_p2 = 0.55596072033282613802;
constexpr double r7_p3 = 0.20652775095070621357;
constexpr double r12_p1 = 0.69999468265934993624;
constexpr double r12_p5 = 0.23988075388500934077;
constexpr double r5_p1 = 0.67301439340176804453;
constexpr double r5_p2 = 0.28572022571920984455;
// Euler: t = (R^2 - c^2) / 2R for triangles.
constexpr double r3_p1 = 0.455;
// Fuss: (R^2 - c^2)^2 = 2 t^2 (R^2 + c^2) for quadrilaterals.
constexpr double r4_p1 = 0.616329769945522684575;

auto rigid(double alpha) {
    return [alpha](double x) { return x + alpha; };
}

auto concentric_lift(double t) { return poncelet_family(1.0, 0.0).lift(t); }

TEST(RotationNumber, RigidRationalLocksExactly) {
    const auto est = rotation_number(rigid(1.0 / 3.0), 0.0, 1e-6);
    ASSERT_TRUE(est.locked());
    EXPECT_EQ(est.lock->p, 1);
    EXPECT_EQ(est.lock->q, 3);
    EXPECT_EQ(est.error_radius, 0.0);
    EXPECT_DOUBLE_EQ(est.value, 1.0 / 3.0);
}

TEST(RotationNumber, RigidRotationWithinErrorRadius) {
    // 0.3176 = 397/1250 has denominator beyond q_max, so no lock is certified.
    const auto est = rotation_number(rigid(0.3176), 0.0, 1e-7);
    EXPECT_FALSE(est.locked());
    EXPECT_LE(std::abs(est.value - 0.3176), est.error_radius);
    EXPECT_NEAR(est.value, 0.3176, 1e-9);
}

TEST(RotationNumber, ConcentricHalfRadiusIsOneThird) {
    const auto est = rotation_number(concentric_lift(0.5), 0.0, 1e-6);
    ASSERT_TRUE(est.locked());
    EXPECT_EQ(est.lock->p, 1);
    EXPECT_EQ(est.lock->q, 3);
    EXPECT_LT(est.lock->residual, 1e-10);
}

TEST(RotationNumber, ArnoldSelfConsistency) {
    const auto g = arnold_family(0.4).lift(0.25);
    RotationOptions opts;
    opts.q_max = 0;
    double prev_tol = 1e-4;
    auto prev = rotation_number(g, 0.0, prev_tol, opts);
    for (double tol : {5e-5, 2.5e-5, 1.25e-5}) {
        const auto cur = rotation_number(g, 0.0, tol, opts);
        EXPECT_LT(std::abs(cur.value - prev.value), 2.0 * prev_tol);
        EXPECT_LE(std::abs(cur.value - prev.value), cur.error_radius + prev.error_radius);
        prev = cur;
        prev_tol = tol;
    }
    const auto full = rotation_number(g, 0.0, 1e-6);
    EXPECT_LE(std::abs(full.value - prev.value), full.error_radius + prev.error_radius);
}

TEST(RotationNumber, RejectsBadTolerance) {
    EXPECT_THROW(rotation_number(rigid(0.1), 0.0, 0.0), InvalidConfig);
    EXPECT_THROW(rotation_number(rigid(0.1), 0.0, -1.0), InvalidConfig);
}

TEST(RotationNumber, DetectsNonMonotoneLift) {
    auto bad = [](double x) { return x + 0.3 * std::sin(two_pi * x); };
    EXPECT_THROW(rotation_number(bad, 0.0, 1e-4), ContractViolation);
}

TEST(RotationNumber, DetectsAperiodicLift) {
    auto bad = [](double x) { return 1.5 * x; };
    EXPECT_THROW(rotation_number(bad, 0.0, 1e-4), ContractViolation);
}

TEST(RationalLock, RigidAnyPointQualifies) {
    const auto lock = detect_rational_lock(rigid(1.0 / 3.0), 1, 3);
    ASSERT_TRUE(lock.has_value());
    EXPECT_LT(lock->residual, 1e-12);
}

TEST(RationalLock, GoldenRigidHasNoLock) {
    for (long long q = 1; q <= 64; ++q) {
        const auto p = static_cast<long long>(std::llround(golden * static_cast<double>(q)));
        for (long long pp = p - 1; pp <= p + 1; ++pp) {
            EXPECT_FALSE(detect_rational_lock(rigid(golden), pp, q).has_value()) << pp << "/" << q;
        }
    }
}

TEST(RationalLock, ConcentricTwoFifths) {
    const auto lock = detect_rational_lock(concentric_lift(std::cos(2.0 * pi / 5.0)), 2, 5);
    ASSERT_TRUE(lock.has_value());
    EXPECT_LT(lock->residual, 1e-12);
}

TEST(RationalLock, RejectsNonPositivePeriod) {
    EXPECT_THROW(detect_rational_lock(rigid(0.5), 1, 0), InvalidConfig);
}

TEST(Staircase, ConcentricOracle) {
    const auto report = staircase(poncelet_family(1.0, 0.0), {0.0, 0.25, 0.5, 0.75, 1.0}, 1e-6);
    ASSERT_EQ(report.samples.size(), 5u);
    const std::vector<double> expected{0.5, std::acos(0.25) / pi, 1.0 / 3.0, std::acos(0.75) / pi, 0.0};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto& e = report.samples[i].estimate;
        EXPECT_LE(std::abs(e.value - expected[i]), e.error_radius + 1e-9) << i;
    }
    EXPECT_EQ(report.direction, Direction::decreasing);
    EXPECT_TRUE(report.monotone);
    for (std::size_t i = 0; i + 1 < report.samples.size(); ++i) {
        EXPECT_GT(report.samples[i].estimate.value, report.samples[i + 1].estimate.value);
    }
}

TEST(Staircase, RejectsUnsortedOrOutOfRangeGrid) {
    const auto fam = poncelet_family(1.0, 0.3);
    EXPECT_THROW(staircase(fam, {0.2, 0.1}, 1e-4), InvalidConfig);
    EXPECT_THROW(staircase(fam, {0.1, 0.8}, 1e-4), InvalidConfig);
    EXPECT_THROW(staircase(fam, {}, 1e-4), InvalidConfig);
}

TEST(Staircase, ResultIndependentOfWorkerCount) {
    const auto fam = arnold_family(0.8);
    const auto grid = linear_grid(0.0, 1.0, 17);
    const auto serial = staircase(fam, grid, 1e-4, {}, 1);
    const auto threaded = staircase(fam, grid, 1e-4, {}, 4);
    ASSERT_EQ(serial.samples.size(), threaded.samples.size());
    for (std::size_t i = 0; i < serial.samples.size(); ++i) {
        EXPECT_EQ(serial.samples[i].estimate.value, threaded.samples[i].estimate.value);
        EXPECT_EQ(serial.samples[i].estimate.locked(), threaded.samples[i].estimate.locked());
    }
}

TEST(LinearGrid, EndpointsExact) {
    const auto g = linear_grid(0.0, 0.7, 101);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_EQ(g.back(), 0.7);
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
}

TEST(SolveRotation, ConcentricClosedForms) {
    const auto fam = poncelet_family(1.0, 0.0);
    const auto third = solve_rotation(fam, 1, 3, 0.0, 1.0);
    EXPECT_NEAR(third.t, 0.5, 1e-11);
    const auto two_fifths = solve_rotation(fam, 2, 5, 0.0, 1.0);
    EXPECT_NEAR(two_fifths.t, std::cos(2.0 * pi / 5.0), 1e-11);
    const auto half = solve_rotation(fam, 1, 2, 0.0, 1.0);
    EXPECT_EQ(half.t, 0.0);
}

TEST(SolveRotation, Errors) {
    const auto fam = poncelet_family(1.0, 0.0);
    EXPECT_THROW(solve_rotation(fam, 3, 5, 0.0, 1.0), NoSolution);
    EXPECT_THROW(solve_rotation(fam, 2, 4, 0.0, 1.0), InvalidConfig);
    EXPECT_THROW(solve_rotation(fam, 1, 3, 0.5, 1.5), InvalidConfig);
}

TEST(SolveRotation, OffCenterMatchesOracles) {
    const auto fam = poncelet_family(1.0, 0.3);
    EXPECT_NEAR(solve_rotation(fam, 1, 3, fam.a, fam.b).t, r3_p1, 1e-11);
    EXPECT_NEAR(solve_rotation(fam, 1, 4, fam.a, fam.b).t, r4_p1, 1e-11);
    EXPECT_NEAR(solve_rotation(fam, 2, 7, fam.a, fam.b).t, r7_p2, 1e-11);
}

TEST(LocateRotation, RigidGolden) {
    const double t = locate_rotation(rigid_family(), golden, 0.0, 1.0);
    EXPECT_NEAR(t, golden, 1e-4);
}

TEST(Totient, Examples) {
    EXPECT_EQ(euler_totient(1), 1);
    EXPECT_EQ(euler_totient(3), 2);
    EXPECT_EQ(euler_totient(12), 4);
    EXPECT_EQ(euler_totient(97), 96);
    EXPECT_THROW(euler_totient(0), InvalidConfig);
}

TEST(VerifyClosure, ConcentricTriangle) {
    const auto report = verify_closure({0.5, 3, 1, 0.0}, 1.0, 0.0);
    EXPECT_LT(report.max_residual, 1e-10);
    EXPECT_TRUE(report.ok());
}

TEST(VerifyClosure, DiameterTwoCycle) {
    const auto report = verify_closure({0.0, 2, 1, 0.0}, 1.0, 0.0);
    EXPECT_LT(report.max_residual, 1e-12);
    EXPECT_TRUE(report.ok());
}

TEST(VerifyClosure, SevenGonOffCenter) {
    for (auto [t, p] : {std::pair{r7_p1, 1}, {r7_p2, 2}, {r7_p3, 3}}) {
        const auto report = verify_closure({t, 7, p, 0.0}, 1.0, 0.3);
        EXPECT_LT(report.max_residual, 1e-8) << p;
        EXPECT_TRUE(report.ok()) << p;
    }
}

TEST(VerifyClosure, DetectsEarlyReturnAndNonClosure) {
    // t = 0.5 closes after 3 steps, so asking for 6 reports an early return.
    EXPECT_FALSE(verify_closure({0.5, 6, 2, 0.0}, 1.0, 0.0).exact_period);
    EXPECT_FALSE(verify_closure({0.45, 3, 1, 0.0}, 1.0, 0.0).closed);
}

TEST(CountPairs, ConcentricExamples) {
    const auto three = count_poncelet_pairs(1.0, 0.0, 3);
    ASSERT_EQ(three.pairs.size(), 1u);
    EXPECT_NEAR(three.pairs[0].t, 0.5, 1e-11);
    EXPECT_TRUE(three.pass);

    const auto five = count_poncelet_pairs(1.0, 0.0, 5);
    ASSERT_EQ(five.pairs.size(), 2u);
    std::vector<double> ts{five.pairs[0].t, five.pairs[1].t};
    std::sort(ts.begin(), ts.end());
    EXPECT_NEAR(ts[0], std::cos(2.0 * pi / 5.0), 1e-11);
    EXPECT_NEAR(ts[1], std::cos(pi / 5.0), 1e-11);
    EXPECT_TRUE(five.pass);

    const auto four = count_poncelet_pairs(1.0, 0.0, 4);
    ASSERT_EQ(four.pairs.size(), 1u);
    EXPECT_NEAR(four.pairs[0].t, std::cos(pi / 4.0), 1e-11);
}

TEST(CountPairs, OffCenterMatchesOracles) {
    auto radius_for = [](const CountReport& r, int p) {
        for (const auto& pair : r.pairs) {
            if (pair.p == p) {
                return pair.t;
            }
        }
        return -1.0;
    };
    const auto twelve = count_poncelet_pairs(1.0, 0.3, 12);
    EXPECT_EQ(twelve.pairs.size(), 2u);
    EXPECT_TRUE(twelve.pass);
    EXPECT_NEAR(radius_for(twelve, 1), r12_p1, 1e-10);
    EXPECT_NEAR(radius_for(twelve, 5), r12_p5, 1e-10);
    for (const auto& pair : twelve.pairs) {
        EXPECT_LT(pair.closure_residual, 1e-8);
    }

    const auto seven = count_poncelet_pairs(1.0, 0.3, 7);
    EXPECT_EQ(seven.pairs.size(), 3u);
    EXPECT_NEAR(radius_for(seven, 1), r7_p1, 1e-10);
    EXPECT_NEAR(radius_for(seven, 2), r7_p2, 1e-10);
    EXPECT_NEAR(radius_for(seven, 3), r7_p3, 1e-10);

    const auto five = count_poncelet_pairs(1.0, 0.3, 5);
    EXPECT_NEAR(radius_for(five, 1), r5_p1, 1e-10);
    EXPECT_NEAR(radius_for(five, 2), r5_p2, 1e-10);
}

TEST(CountPairs, EndpointRotationValues) {
    const auto report = count_poncelet_pairs(1.0, 0.3, 3);
    EXPECT_DOUBLE_EQ(report.r_inner.value, 0.5);
    EXPECT_LE(std::abs(report.r_outer.value), report.r_outer.error_radius + 1e-12);
    EXPECT_THROW(count_poncelet_pairs(1.0, 0.3, 2), InvalidConfig);
}

// Property: rigid rotations never escape their error radius.
TEST(RotationProperty, ErrorBoundSoundness) {
    std::mt19937_64 rng{2024};
    RotationOptions opts;
    opts.q_max = 0;
    for (int i = 0; i < 40; ++i) {
        const double alpha = uniform_dyadic(rng);
        const auto est = rotation_number(rigid(alpha), uniform_dyadic(rng), 1e-5, opts);
        EXPECT_LE(std::abs(est.value - alpha), est.error_radius) << alpha;
    }
}

// Property: h^-1 g h has the rotation number of g.
TEST(RotationProperty, ConjugationInvariance) {
    std::mt19937_64 rng{77};
    for (int i = 0; i < 8; ++i) {
        const double eps = 0.9 * uniform_dyadic(rng) / two_pi;
        const double shift = uniform_dyadic(rng);
        auto h = [eps, shift](double x) { return x + shift + eps * std::sin(two_pi * x); };
        auto h_inv = [h](double y) {
            double lo = y - 1.5;
            double hi = y + 1.5;
            for (int k = 0; k < 80; ++k) {
                const double mid = 0.5 * (lo + hi);
                (h(mid) < y ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        };
        const auto g = arnold_family(0.6).lift(uniform_dyadic(rng));
        auto conj = [&](double x) { return h_inv(g(h(x))); };
        RotationOptions opts;
        opts.q_max = 0;
        const auto a = rotation_number(g, 0.0, 1e-4, opts);
        const auto b = rotation_number(conj, 0.0, 1e-4, opts);
        EXPECT_LE(std::abs(a.value - b.value), a.error_radius + b.error_radius + 1e-9);
    }
}

// Property: pointwise g1 <= g2 implies r(g1) <= r(g2).
TEST(RotationProperty, Comparison) {
    std::mt19937_64 rng{5};
    const auto fam = arnold_family(0.9);
    for (int i = 0; i < 16; ++i) {
        double t1 = uniform_dyadic(rng);
        double t2 = uniform_dyadic(rng);
        if (t1 > t2) {
            std::swap(t1, t2);
        }
        const auto a = rotation_number(fam.lift(t1), 0.0, 1e-5);
        const auto b = rotation_number(fam.lift(t2), 0.0, 1e-5);
        EXPECT_LE(a.value, b.value + a.error_radius + b.error_radius + 1e-12);
    }
}

// Property: distinct concentric radii with irrational rotation values are strictly ordered.
TEST(RotationProperty, StrictAtIrrationalConcentric) {
    const auto fam = poncelet_family(1.0, 0.0);
    // r(t) = arccos(t) / pi is irrational for these t (Niven).
    for (auto [t1, t2] : {std::pair{0.1, 0.2}, {0.3, 0.35}, {0.6, 0.9}}) {
        const auto a = rotation_number(fam.lift(t1), 0.0, 1e-6);
        const auto b = rotation_number(fam.lift(t2), 0.0, 1e-6);
        EXPECT_GT(a.lower(), b.upper());
    }
}

TEST(RotationProperty, PorismIndependentOfSeed) {
    const auto fam = poncelet_family(1.0, 0.3);
    const auto sol = solve_rotation(fam, 1, 5, fam.a, fam.b);
    for (std::uint64_t seed : {1u, 2u, 99u}) {
        EXPECT_LT(verify_closure({sol.t, 5, 1, 0.0}, 1.0, 0.3, 20, seed).max_residual, 1e-8);
    }
}

} // namespace
