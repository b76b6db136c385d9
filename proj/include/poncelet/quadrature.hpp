#pragma once

#include <cmath>

namespace poncelet::quadrature {

namespace detail {

template <class Fn>
double simpson_step(const Fn& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth, int level) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // At least three bisection levels before accepting.
    if (depth <= 0 || (level >= 3 && std::abs(delta) <= 15.0 * tol)) {
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, level + 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, level + 1);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
/// Reversed bounds give the negated integral.
template <class Fn>
double adaptive_simpson(const Fn& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
    if (a == b) {
        return 0.0;
    }
    if (b < a) {
        return -adaptive_simpson(f, b, a, tol, max_depth);
    }
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, 0);
}

} // namespace poncelet::quadrature
