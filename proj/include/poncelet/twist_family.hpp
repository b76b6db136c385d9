#pragma once

// Second-order growth of r(t) for families of lifts that move upward in the
// parameter: twist margin, separation of two lifts, the excess/defect
// comparison with convergents, monotonicity of r, and the limsup quotient
// (r(t2) - r(t1)) / (t2 - t1)^2 sampled on brackets around tau.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "poncelet/confrac.hpp"
#include "poncelet/errors.hpp"
#include "poncelet/family.hpp"
#include "poncelet/rotation.hpp"

namespace poncelet {

struct TwistMargin {
    double m = 0.0;
    std::size_t t_samples = 0;
    std::size_t x_samples = 0;
    double argmin_t = 0.0;
    double argmin_x = 0.0;
};

/// Sampled infimum of d g_t(x) / dt over t_grid x x_grid.
inline TwistMargin twist_margin(const MonotoneCircleFamily& family, const std::vector<double>& t_grid,
                                const std::vector<double>& x_grid) {
    if (t_grid.empty() || x_grid.empty()) {
        throw InvalidConfig("twist margin needs nonempty grids");
    }
    TwistMargin out;
    out.t_samples = t_grid.size();
    out.x_samples = x_grid.size();
    out.m = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        for (double x : x_grid) {
            const double v = family.derivative(t, x);
            if (!(v > 0.0)) {
                std::ostringstream msg;
                msg << "twist condition fails: dg/dt = " << v << " at t = " << t << ", x = " << x;
                throw PropertyFailure(msg.str());
            }
            if (v < out.m) {
                out.m = v;
                out.argmin_t = t;
                out.argmin_x = x;
            }
        }
    }
    return out;
}

/// x-grid of `n` points covering one period [0, 1).
inline std::vector<double> period_grid(std::size_t n) {
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = static_cast<double>(i) / static_cast<double>(n);
    }
    return grid;
}

/// inf_x (g2(x) - g1(x)) over the sample grid; must be positive.
template <CircleLift G1, CircleLift G2>
double separation_alpha(const G1& g1, const G2& g2, const std::vector<double>& x_grid) {
    if (x_grid.empty()) {
        throw InvalidConfig("separation needs a nonempty grid");
    }
    double alpha = std::numeric_limits<double>::infinity();
    for (double x : x_grid) {
        alpha = std::min(alpha, g2(x) - g1(x));
    }
    if (!(alpha > 0.0)) {
        std::ostringstream msg;
        msg << "lifts are not strictly ordered: inf (g2 - g1) = " << alpha;
        throw PropertyFailure(msg.str());
    }
    return alpha;
}

// ---------------------------------------------------------------------------

/// Convergents of every real number in [value - radius, value + radius] whose side
/// of that number (excess or defect) is certified, i.e. the following quotient is shared too.
inline std::vector<Convergent> certified_convergents(const RotationEstimate& r, std::size_t max_terms = 64) {
    std::vector<Convergent> out;
    if (r.locked()) {
        return out;
    }
    const auto cf = cf_expand_interval(exact_rational(r.lower()), exact_rational(r.upper()), max_terms);
    for (std::size_t n = 0; n + 1 < cf.size(); ++n) {
        out.push_back(cf[n]);
    }
    return out;
}

struct ComparisonReport {
    RotationEstimate r1;
    RotationEstimate r2;
    double alpha = 0.0;
    bool weak_order = false;  ///< r1 <= r2 within error radii
    std::optional<Convergent> excess;  ///< case b: excess convergent of r1 with q > 1/alpha
    std::optional<bool> excess_holds;  ///< r1 < p/q <= r2
    std::optional<Convergent> defect;  ///< case c: defect convergent of r2 with q' > 1/alpha
    std::optional<bool> defect_holds;  ///< r1 <= p'/q' < r2
    std::string note;

    bool ok() const { return weak_order && excess_holds.value_or(true) && defect_holds.value_or(true); }
};

/// Checks r(g1) <= r(g2) and, for a lock-free side, the sandwich of a convergent
/// with denominator above 1/alpha between the two rotation numbers.
template <CircleLift G1, CircleLift G2>
ComparisonReport comparison_check(const G1& g1, const G2& g2, double alpha, double tol = 1e-7) {
    if (!(alpha > 0.0)) {
        throw InvalidConfig("separation alpha must be positive");
    }
    ComparisonReport rep;
    rep.alpha = alpha;
    rep.r1 = rotation_number(g1, 0.0, tol);
    rep.r2 = rotation_number(g2, 0.0, tol);
    rep.weak_order = rep.r1.lower() <= rep.r2.upper();
    const Rational min_q = Rational{1} / exact_rational(alpha);

    std::ostringstream note;
    if (!rep.r1.locked()) {
        const auto convs = certified_convergents(rep.r1);
        for (std::size_t n = 1; n < convs.size(); n += 2) {
            if (Rational{convs[n].q} > min_q) {
                rep.excess = convs[n];
                break;
            }
        }
        if (rep.excess) {
            const Rational v = rep.excess->value();
            rep.excess_holds = v > exact_rational(rep.r1.upper()) && v <= exact_rational(rep.r2.upper());
        } else {
            note << "no certified excess convergent of r1 with q > 1/alpha; ";
        }
    }
    if (!rep.r2.locked()) {
        const auto convs = certified_convergents(rep.r2);
        for (std::size_t n = 0; n < convs.size(); n += 2) {
            if (Rational{convs[n].q} > min_q) {
                rep.defect = convs[n];
                break;
            }
        }
        if (rep.defect) {
            const Rational v = rep.defect->value();
            rep.defect_holds = v >= exact_rational(rep.r1.lower()) && v < exact_rational(rep.r2.lower());
        } else {
            note << "no certified defect convergent of r2 with q' > 1/alpha; ";
        }
    }
    rep.note = note.str();
    return rep;
}

// ---------------------------------------------------------------------------

struct MonotonicityReport {
    StaircaseReport staircase;
    bool nondecreasing = true;
    std::size_t strict_certified = 0;   ///< lock-free pairs with a certified increase
    std::size_t strict_unresolved = 0;  ///< lock-free pairs whose increase is within error radii
    std::size_t plateau_pairs = 0;      ///< both ends locked to the same rational
    std::vector<std::size_t> violations;

    bool ok() const { return nondecreasing && violations.empty(); }
};

/// r over t_grid must be nondecreasing, and strictly increasing across any pair
/// where either end is lock-free.
inline MonotonicityReport proposition1_check(const MonotoneCircleFamily& family, const std::vector<double>& t_grid,
                                             double tol = 1e-6, unsigned workers = 0) {
    MonotonicityReport rep;
    rep.staircase = staircase(family, t_grid, tol, {}, workers);
    const auto& s = rep.staircase.samples;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const auto& e0 = s[i].estimate;
        const auto& e1 = s[i + 1].estimate;
        const double step = e1.value - e0.value;
        const double radii = e0.error_radius + e1.error_radius;
        if (step < -radii - 1e-12) {
            rep.nondecreasing = false;
            rep.violations.push_back(i);
            continue;
        }
        if (e0.locked() && e1.locked()) {
            if (e0.lock->p * e1.lock->q == e1.lock->p * e0.lock->q) {
                ++rep.plateau_pairs;
            } else if (step <= 0.0) {
                rep.violations.push_back(i);
            }
            continue;
        }
        if (step > radii) {
            ++rep.strict_certified;
        } else {
            ++rep.strict_unresolved;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------

struct BracketSample {
    double delta = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    double ratio = 0.0;  ///< lower end of (r(t2) - r(t1)) / (t2 - t1)^2
    bool from_convergents = false;
    std::string excess;  ///< "p/q" used for t2, empty for symmetric brackets
    std::string defect;
};

struct SecondOrderReport {
    double tau = 0.0;
    RotationEstimate r_tau;
    double m = 0.0;
    double epsilon = 0.0;
    double bound = 0.0;
    double best_ratio = 0.0;
    bool applicable = true;
    bool pass = false;
    std::vector<BracketSample> samples;
    std::vector<double> running_best;  ///< best_ratio after each delta
    std::string status;
};

struct SecondOrderOptions {
    std::vector<double> deltas;  ///< empty: 0.1 * 2^-k, k = 1..12
    double tol = 1e-7;
    double epsilon = 0.1;
    std::size_t margin_t_points = 33;
    std::size_t margin_x_points = 256;
    std::size_t separation_points = 512;
};

inline std::vector<double> default_deltas() {
    std::vector<double> d;
    for (int k = 1; k <= 12; ++k) {
        d.push_back(0.1 * std::ldexp(1.0, -k));
    }
    return d;
}

namespace detail {

/// Parameter t on the far side of tau where inf_x |g_t - g_tau| equals `target`.
inline double separation_root(const MonotoneCircleFamily& family, double tau, double far, double target,
                              const std::vector<double>& x_grid) {
    auto sep = [&](double t) {
        const auto lo = family.lift(std::min(t, tau));
        const auto hi = family.lift(std::max(t, tau));
        double v = std::numeric_limits<double>::infinity();
        for (double x : x_grid) {
            v = std::min(v, hi(x) - lo(x));
        }
        return v;
    };
    double near = tau;
    for (int it = 0; it < 200 && std::abs(far - near) > 1e-15; ++it) {
        const double mid = 0.5 * (near + far);
        if (sep(mid) < target) {
            near = mid;
        } else {
            far = mid;
        }
    }
    return far;
}

} // namespace detail

/// Samples the limsup quotient around tau and compares its running maximum with
/// m^2 / (e^{2F} (1 + e^{2F})^2).
///
/// For each delta, a consecutive convergent pair p'/q' < r(tau) < p/q satisfying the
/// K_eps gap inequality with 1/q < inf(g_{tau+delta} - g_tau) and
/// 1/q' < inf(g_tau - g_{tau-delta}) is selected; t1 < tau < t2 are the parameters
/// where those infima equal 1/q' and 1/q. The symmetric bracket tau -+ delta is
/// sampled as well. Every ratio uses the lower ends of the rotation estimates.
inline SecondOrderReport second_order_estimate(const MonotoneCircleFamily& family, double tau,
                                               SecondOrderOptions opts = {}) {
    if (!(tau > family.a && tau < family.b)) {
        throw InvalidConfig("tau must be interior to the parameter interval");
    }
    if (opts.deltas.empty()) {
        opts.deltas = default_deltas();
    }
    SecondOrderReport rep;
    rep.tau = tau;
    rep.epsilon = opts.epsilon;
    const auto margin = twist_margin(family, linear_grid(family.a, family.b, opts.margin_t_points),
                                     period_grid(opts.margin_x_points));
    rep.m = margin.m;
    rep.bound = second_order_bound(rep.m);
    rep.r_tau = rotation_number(family.lift(tau), 0.0, opts.tol);
    if (rep.r_tau.locked()) {
        rep.applicable = false;
        rep.status = "inapplicable";
        return rep;
    }

    const double k_eps = k_epsilon(opts.epsilon);
    const auto x_grid = period_grid(opts.separation_points);
    const auto convs = certified_convergents(rep.r_tau);
    auto estimate = [&](double t) { return rotation_number(family.lift(t), 0.0, opts.tol); };
    double best = -std::numeric_limits<double>::infinity();

    for (double delta : opts.deltas) {
        if (!(tau - delta >= family.a && tau + delta <= family.b)) {
            rep.running_best.push_back(best);
            continue;
        }
        // Symmetric bracket.
        {
            const auto r1 = estimate(tau - delta);
            const auto r2 = estimate(tau + delta);
            const double width = 2.0 * delta;
            BracketSample s{delta, tau - delta, tau + delta, (r2.lower() - r1.upper()) / (width * width), false, {}, {}};
            best = std::max(best, s.ratio);
            rep.samples.push_back(s);
        }
        const double alpha_minus = separation_alpha(family.lift(tau - delta), family.lift(tau), x_grid);
        const double alpha_plus = separation_alpha(family.lift(tau), family.lift(tau + delta), x_grid);
        for (std::size_t n = 1; n + 1 < convs.size(); ++n) {
            const Convergent& exc = n % 2 == 1 ? convs[n] : convs[n + 1];
            const Convergent& def = n % 2 == 1 ? convs[n + 1] : convs[n];
            const double inv_q = 1.0 / Convergent::to_double(exc.q);
            const double inv_qd = 1.0 / Convergent::to_double(def.q);
            if (!(inv_q < alpha_plus && inv_qd < alpha_minus)) {
                continue;
            }
            const double gap = (exc.value() - def.value()).convert_to<double>();
            if (gap < k_eps * (inv_q + inv_qd) * (inv_q + inv_qd)) {
                continue;
            }
            const double t2 = detail::separation_root(family, tau, tau + delta, inv_q, x_grid);
            const double t1 = detail::separation_root(family, tau, tau - delta, inv_qd, x_grid);
            const auto r1 = estimate(t1);
            const auto r2 = estimate(t2);
            const double width = t2 - t1;
            BracketSample s{delta, t1, t2, (r2.lower() - r1.upper()) / (width * width), true,
                            to_string(exc.p) + "/" + to_string(exc.q), to_string(def.p) + "/" + to_string(def.q)};
            best = std::max(best, s.ratio);
            rep.samples.push_back(s);
            break;
        }
        rep.running_best.push_back(best);
    }
    rep.best_ratio = best;
    rep.pass = best >= rep.bound;
    rep.status = rep.pass ? "pass" : "fail";
    return rep;
}

} // namespace poncelet
