#pragma once

// Rotation numbers of circle-map lifts, rational-lock certificates, and the
// Poncelet-pair counting pipeline built on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "poncelet/errors.hpp"
#include "poncelet/family.hpp"
#include "poncelet/geometry.hpp"
#include "poncelet/parallel.hpp"
#include "poncelet/sampling.hpp"

namespace poncelet {

/// A real function g with g(x + 1) = g(x) + 1, monotone increasing.
template <class G>
concept CircleLift = std::regular_invocable<const G&, double> &&
                     std::convertible_to<std::invoke_result_t<const G&, double>, double>;

/// Certificate that g^q(x0) = x0 + p up to `residual`.
struct RationalLock {
    long long p = 0;
    long long q = 1;
    double x0 = 0.0;
    double residual = 0.0;

    double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

struct RotationEstimate {
    double value = 0.0;
    double error_radius = 0.0;
    std::uint64_t iterations = 0;
    std::optional<RationalLock> lock;

    double lower() const { return value - error_radius; }
    double upper() const { return value + error_radius; }
    bool locked() const { return lock.has_value(); }
};

struct RotationOptions {
    int q_max = 64;
    int lock_grid = 512;
    std::uint64_t screen_iterations = 4096;
    bool check_contract = true;
};

inline constexpr double lock_tolerance = 1e-12;
inline constexpr double lock_acceptance = 1e-10;

/// g^n(x), carrying the integer part separately so that g is only ever
/// evaluated on [0, 1).
template <CircleLift G>
double iterate_lift(const G& g, double x, std::uint64_t n) {
    const double base = std::floor(x);
    double whole = base;
    double frac = x - base;
    for (std::uint64_t k = 0; k < n; ++k) {
        const double y = g(frac);
        if (!std::isfinite(y)) {
            throw ContractViolation("lift produced a non-finite value");
        }
        const double shift = std::floor(y);
        whole += shift;
        frac = y - shift;
    }
    return whole + frac;
}

/// Samples periodicity g(x + 1) - g(x) = 1 and monotonicity of g on [0, 1].
template <CircleLift G>
void check_lift_contract(const G& g, int samples = 256) {
    double prev = g(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double x = static_cast<double>(i) / samples;
        const double gx = g(x);
        if (gx < prev - 1e-12) {
            std::ostringstream msg;
            msg << "lift is not monotone near x = " << x;
            throw ContractViolation(msg.str());
        }
        prev = gx;
    }
    for (int i = 0; i < 16; ++i) {
        const double x = (i + 0.5) / 16.0;
        const double defect = g(x + 1.0) - g(x) - 1.0;
        if (std::abs(defect) >= 1e-12) {
            std::ostringstream msg;
            msg << "lift periodicity defect " << defect << " at x = " << x;
            throw ContractViolation(msg.str());
        }
    }
}

namespace detail {

template <class D>
std::optional<RationalLock> refine_sign_change(const D& d, double lo, double hi, double d_lo, long long p,
                                                long long q) {
    double best_x = lo;
    double best_d = d_lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double dm = d(mid);
        if (std::abs(dm) < std::abs(best_d)) {
            best_x = mid;
            best_d = dm;
        }
        if (std::abs(dm) < lock_tolerance) {
            break;
        }
        if ((dm < 0.0) == (d_lo < 0.0)) {
            lo = mid;
            d_lo = dm;
        } else {
            hi = mid;
        }
    }
    if (std::abs(best_d) < lock_acceptance) {
        return RationalLock{p, q, best_x, std::abs(best_d)};
    }
    return std::nullopt;
}

template <class D>
std::optional<RationalLock> refine_touching(const D& d, double lo, double hi, long long p, long long q) {
    constexpr double inv_phi = 0.6180339887498949;
    auto f = [&d](double x) { return std::abs(d(x)); };
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 120 && hi - lo > 1e-17; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if (std::min(f1, f2) < lock_tolerance) {
            break;
        }
    }
    const double x = f1 < f2 ? x1 : x2;
    const double r = std::min(f1, f2);
    if (r < lock_tolerance) {
        return RationalLock{p, q, x, r};
    }
    return std::nullopt;
}

} // namespace detail

/// Looks for x0 with g^q(x0) = x0 + p.
///
/// d(x) = g^q(x) - x - p is sampled on `grid` points of [0, 1]; a sign change
/// is refined by bisection, and a near-touching minimum of |d| by golden
/// section. Absence is not a proof that no periodic orbit exists.
template <CircleLift G>
std::optional<RationalLock> detect_rational_lock(const G& g, long long p, long long q, int grid = 512) {
    if (q <= 0) {
        throw InvalidConfig("lock period q must be positive");
    }
    auto d = [&](double x) { return iterate_lift(g, x, static_cast<std::uint64_t>(q)) - x - static_cast<double>(p); };

    std::vector<double> values(static_cast<std::size_t>(grid) + 1);
    std::size_t best = 0;
    for (int i = 0; i <= grid; ++i) {
        const double x = static_cast<double>(i) / grid;
        values[i] = d(x);
        if (std::abs(values[i]) < std::abs(values[best])) {
            best = static_cast<std::size_t>(i);
        }
        if (std::abs(values[i]) < lock_tolerance) {
            return RationalLock{p, q, x, std::abs(values[i])};
        }
    }
    for (int i = 0; i < grid; ++i) {
        if ((values[i] < 0.0) != (values[i + 1] < 0.0)) {
            const double lo = static_cast<double>(i) / grid;
            const double hi = static_cast<double>(i + 1) / grid;
            if (auto lock = detail::refine_sign_change(d, lo, hi, values[i], p, q)) {
                return lock;
            }
        }
    }
    if (std::abs(values[best]) < 1e-3) {
        const double h = 1.0 / grid;
        const double x = static_cast<double>(best) / grid;
        return detail::refine_touching(d, x - h, x + h, p, q);
    }
    return std::nullopt;
}

/// Rotation number of a lift.
///
/// A short screening orbit restricts the lock scan to fractions p/q (q <= q_max)
/// that can still equal r(g). A found lock gives the exact value with zero
/// error radius. Otherwise the Birkhoff quotient (g^n(x0) - x0) / n with
/// n = ceil(1 / tol) is returned with the rigorous radius 1 / n, from
/// |g^n(x) - x - n r(g)| < 1.
template <CircleLift G>
RotationEstimate rotation_number(const G& g, double x0, double tol, const RotationOptions& opts = {}) {
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw InvalidConfig("rotation tolerance must be positive");
    }
    const auto n = static_cast<std::uint64_t>(std::ceil(1.0 / tol));
    if (opts.check_contract) {
        check_lift_contract(g);
    }

    const std::uint64_t n_screen = std::min(n, opts.screen_iterations);
    const double screen = (iterate_lift(g, x0, n_screen) - x0) / static_cast<double>(n_screen);
    const double slack = 1.0 / static_cast<double>(n_screen) + 1e-12;
    for (long long q = 1; q <= opts.q_max; ++q) {
        const auto p_lo = static_cast<long long>(std::ceil((screen - slack) * static_cast<double>(q)));
        const auto p_hi = static_cast<long long>(std::floor((screen + slack) * static_cast<double>(q)));
        for (long long p = p_lo; p <= p_hi; ++p) {
            if (std::gcd(p, q) != 1) {
                continue;
            }
            if (auto lock = detect_rational_lock(g, p, q, opts.lock_grid)) {
                return {lock->value(), 0.0, n_screen, lock};
            }
        }
    }

    const double value = (iterate_lift(g, x0, n) - x0) / static_cast<double>(n);
    return {value, 1.0 / static_cast<double>(n), n, std::nullopt};
}

// ---------------------------------------------------------------------------
// Staircases over a family

enum class Direction { increasing, decreasing, constant };

inline const char* to_string(Direction d) {
    switch (d) {
    case Direction::increasing:
        return "increasing";
    case Direction::decreasing:
        return "decreasing";
    case Direction::constant:
        return "constant";
    }
    return "unknown";
}

struct StaircaseSample {
    double t = 0.0;
    RotationEstimate estimate;
};

struct StaircaseReport {
    std::vector<StaircaseSample> samples;
    Direction direction = Direction::constant;
    bool monotone = true;
    std::vector<std::size_t> violations;  ///< index i: samples i and i + 1 are out of order
};

/// r(t) on a sorted grid, with a weak-monotonicity verdict up to twice the summed error radii.
inline StaircaseReport staircase(const MonotoneCircleFamily& family, const std::vector<double>& t_grid, double tol,
                                 const RotationOptions& opts = {}, unsigned workers = 0) {
    if (t_grid.empty()) {
        throw InvalidConfig("staircase grid is empty");
    }
    if (!std::is_sorted(t_grid.begin(), t_grid.end())) {
        throw InvalidConfig("staircase grid must be sorted");
    }
    for (double t : t_grid) {
        if (!family.contains(t)) {
            throw InvalidConfig("staircase grid leaves the family's parameter interval");
        }
    }
    StaircaseReport report;
    auto estimates = parallel_map(
        t_grid, [&](double t) { return rotation_number(family.lift(t), 0.0, tol, opts); }, workers);
    report.samples.reserve(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        report.samples.push_back({t_grid[i], estimates[i]});
    }

    const auto& first = report.samples.front().estimate;
    const auto& last = report.samples.back().estimate;
    const double span = last.value - first.value;
    if (std::abs(span) <= first.error_radius + last.error_radius) {
        report.direction = Direction::constant;
    } else {
        report.direction = span > 0.0 ? Direction::increasing : Direction::decreasing;
    }
    const double sign = report.direction == Direction::decreasing ? -1.0 : 1.0;
    for (std::size_t i = 0; i + 1 < report.samples.size(); ++i) {
        const auto& e0 = report.samples[i].estimate;
        const auto& e1 = report.samples[i + 1].estimate;
        const double step = sign * (e1.value - e0.value);
        const double slack = 2.0 * (e0.error_radius + e1.error_radius) + 1e-12;
        if (report.direction == Direction::constant) {
            if (std::abs(e1.value - e0.value) > slack) {
                report.violations.push_back(i);
            }
        } else if (step < -slack) {
            report.violations.push_back(i);
        }
    }
    report.monotone = report.violations.empty();
    return report;
}

/// `n` evenly spaced points covering [a, b].
inline std::vector<double> linear_grid(double a, double b, std::size_t n) {
    std::vector<double> grid(n);
    if (n == 1) {
        grid[0] = a;
        return grid;
    }
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Root finding in the parameter

struct RotationSolution {
    double t = 0.0;
    RationalLock lock;
    int bisections = 0;
};

/// Finds t in [t_lo, t_hi] with r(g_t) = p / q.
///
/// Bisection is driven by the sign of d_t(0) = g_t^q(0) - p, which is positive
/// exactly when r(g_t) > p / q away from the locked set. It runs until the
/// bracket is narrower than tol_t and the lock certificate holds at the midpoint.
inline RotationSolution solve_rotation(const MonotoneCircleFamily& family, long long p, long long q, double t_lo,
                                       double t_hi, double tol_t = 1e-12, int grid = 512) {
    if (q <= 0 || std::gcd(p, q) != 1) {
        throw InvalidConfig("target p/q must be in lowest terms with q > 0");
    }
    if (!(t_lo <= t_hi) || !family.contains(t_lo) || !family.contains(t_hi)) {
        throw InvalidConfig("invalid parameter bracket");
    }
    if (auto lock = detect_rational_lock(family.lift(t_lo), p, q, grid)) {
        return {t_lo, *lock, 0};
    }
    if (auto lock = detect_rational_lock(family.lift(t_hi), p, q, grid)) {
        return {t_hi, *lock, 0};
    }
    auto side = [&](double t) {
        return iterate_lift(family.lift(t), 0.0, static_cast<std::uint64_t>(q)) - static_cast<double>(p);
    };
    double d_lo = side(t_lo);
    const double d_hi = side(t_hi);
    if ((d_lo < 0.0) == (d_hi < 0.0)) {
        std::ostringstream msg;
        msg << "target " << p << "/" << q << " is not in the image of r over [" << t_lo << ", " << t_hi << "]";
        throw NoSolution(msg.str());
    }
    int steps = 0;
    for (;;) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (t_hi - t_lo < tol_t || mid <= t_lo || mid >= t_hi) {
            if (auto lock = detect_rational_lock(family.lift(mid), p, q, grid)) {
                return {mid, *lock, steps};
            }
            if (mid <= t_lo || mid >= t_hi) {
                std::ostringstream msg;
                msg << "bisection for " << p << "/" << q << " converged to t = " << mid
                    << " without a lock certificate";
                throw ResidualFailure(msg.str());
            }
        }
        const double dm = side(mid);
        ++steps;
        if (dm == 0.0) {
            if (auto lock = detect_rational_lock(family.lift(mid), p, q, grid)) {
                return {mid, *lock, steps};
            }
        }
        if ((dm < 0.0) == (d_lo < 0.0)) {
            t_lo = mid;
            d_lo = dm;
        } else {
            t_hi = mid;
        }
    }
}

/// Finds t with r(g_t) close to a real target, by bisection on the sign of
/// g_t^N(0) - N target. The result satisfies |r(g_t) - target| <~ 2 / N.
inline double locate_rotation(const MonotoneCircleFamily& family, double target, double t_lo, double t_hi,
                              std::uint64_t orbit_length = 100000, double tol_t = 1e-13) {
    const double n = static_cast<double>(orbit_length);
    auto side = [&](double t) { return iterate_lift(family.lift(t), 0.0, orbit_length) - n * target; };
    double s_lo = side(t_lo);
    const double s_hi = side(t_hi);
    if ((s_lo < 0.0) == (s_hi < 0.0)) {
        throw NoSolution("target rotation value is not bracketed");
    }
    while (t_hi - t_lo > tol_t) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (mid <= t_lo || mid >= t_hi) {
            break;
        }
        const double sm = side(mid);
        if ((sm < 0.0) == (s_lo < 0.0)) {
            t_lo = mid;
            s_lo = sm;
        } else {
            t_hi = mid;
        }
    }
    return 0.5 * (t_lo + t_hi);
}

// ---------------------------------------------------------------------------
// Poncelet pairs

/// Euler's totient by trial factorization.
inline long long euler_totient(long long n) {
    if (n < 1) {
        throw InvalidConfig("totient argument must be >= 1");
    }
    long long result = n;
    for (long long f = 2; f * f <= n; ++f) {
        if (n % f == 0) {
            while (n % f == 0) {
                n /= f;
            }
            result -= result / f;
        }
    }
    if (n > 1) {
        result -= result / n;
    }
    return result;
}

struct PonceletPair {
    double t = 0.0;
    int n = 0;
    int p = 0;
    double closure_residual = 0.0;
};

struct ClosureReport {
    double max_residual = 0.0;        ///< max over starts of the angular distance after n steps
    double min_early_distance = 0.0;  ///< min over starts and 1 <= k < n of the distance after k steps
    bool winding_ok = true;           ///< total arc after n steps equals 2 pi p
    bool closed = false;
    bool exact_period = false;

    bool ok() const { return closed && exact_period && winding_ok; }
};

inline constexpr double closure_threshold = 1e-8;
inline constexpr double early_return_threshold = 1e-4;

/// Iterates the tangent construction n times from `starts` seeded random angles.
inline ClosureReport verify_closure(const PonceletPair& pair, double R, double c, int starts = 20,
                                    std::uint64_t seed = 1) {
    if (pair.n < 1 || starts < 1) {
        throw InvalidConfig("closure check needs n >= 1 and at least one start");
    }
    const PonceletConfig cfg{R, c, pair.t};
    std::mt19937_64 rng{seed};
    ClosureReport report;
    report.min_early_distance = pi;
    for (int s = 0; s < starts; ++s) {
        const double theta0 = two_pi * uniform_dyadic(rng);
        double theta = theta0;
        for (int k = 1; k <= pair.n; ++k) {
            theta += poncelet_map_geometric(reduce_mod(theta, two_pi), cfg).arc;
            const double dist = circular_distance(theta, theta0, two_pi);
            if (k < pair.n) {
                report.min_early_distance = std::min(report.min_early_distance, dist);
            } else {
                report.max_residual = std::max(report.max_residual, dist);
                const double winding = (theta - theta0) / two_pi;
                if (std::abs(winding - pair.p) > 1e-6) {
                    report.winding_ok = false;
                }
            }
        }
    }
    report.closed = report.max_residual < closure_threshold;
    report.exact_period = pair.n == 1 || report.min_early_distance > early_return_threshold;
    return report;
}

struct CountOptions {
    double tol = 1e-6;       ///< rotation tolerance for the endpoint values
    double tol_t = 1e-12;    ///< radius tolerance of the bisection
    int starts = 20;
    std::uint64_t seed = 1;
};

struct CountReport {
    int n = 0;
    std::vector<PonceletPair> pairs;
    long long expected = 0;  ///< e(n) / 2
    RotationEstimate r_inner;  ///< r at t = 0
    RotationEstimate r_outer;  ///< r at t = R - c
    std::vector<ClosureReport> closures;
    bool pass = false;
};

namespace detail {

inline bool strictly_between(long long p, long long n, const RotationEstimate& a, const RotationEstimate& b) {
    const double v = static_cast<double>(p) / static_cast<double>(n);
    const double lo = std::min(a.value, b.value);
    const double hi = std::max(a.value, b.value);
    const double eps = std::max(a.error_radius, b.error_radius);
    return v > lo + eps && v < hi - eps;
}

} // namespace detail

/// All n-Poncelet pairs among the circles centered at (-c, 0) inside the circle of radius R.
/// The count is checked against e(n) / 2; closure is verified geometrically for each radius.
inline CountReport count_poncelet_pairs(double R, double c, int n, const CountOptions& opts = {}) {
    if (n < 3) {
        throw InvalidConfig("Poncelet pair counting needs n >= 3");
    }
    const auto family = poncelet_family(R, c);
    CountReport report;
    report.n = n;
    report.expected = euler_totient(n) / 2;
    report.r_inner = rotation_number(family.lift(family.a), 0.0, opts.tol);
    report.r_outer = rotation_number(family.lift(family.b), 0.0, opts.tol);

    for (int p = 1; p < n; ++p) {
        if (std::gcd(p, n) != 1 || !detail::strictly_between(p, n, report.r_inner, report.r_outer)) {
            continue;
        }
        const auto sol = solve_rotation(family, p, n, family.a, family.b, opts.tol_t);
        PonceletPair pair{sol.t, n, p, 0.0};
        const auto closure = verify_closure(pair, R, c, opts.starts, opts.seed);
        pair.closure_residual = closure.max_residual;
        report.pairs.push_back(pair);
        report.closures.push_back(closure);
    }
    const bool all_closed =
        std::all_of(report.closures.begin(), report.closures.end(), [](const ClosureReport& cr) { return cr.ok(); });
    report.pass = all_closed && static_cast<long long>(report.pairs.size()) == report.expected;
    return report;
}

} // namespace poncelet
