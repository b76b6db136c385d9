#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "poncelet/errors.hpp"
#include "poncelet/geometry.hpp"

namespace poncelet {

/// A one-parameter family t -> g_t of circle-map lifts over [a, b].
///
/// `eval(t, x)` must be a lift for every t in [a, b]. `partial_t` is optional;
/// when empty, d g_t / dt is approximated by Richardson-extrapolated centered
/// differences (one-sided at the interval ends).
struct MonotoneCircleFamily {
    std::string name;
    double a = 0.0;
    double b = 1.0;
    std::function<double(double, double)> eval;
    std::function<double(double, double)> partial_t;
    double fd_step = 1e-6;

    double operator()(double t, double x) const { return eval(t, x); }

    /// The lift g_t as a unary callable.
    auto lift(double t) const {
        return [fn = eval, t](double x) { return fn(t, x); };
    }

    double derivative(double t, double x) const {
        if (partial_t) {
            return partial_t(t, x);
        }
        return richardson_derivative(t, x);
    }

    bool contains(double t) const { return t >= a && t <= b; }

private:
    double difference(double t, double x, double h) const {
        if (t - h < a) {
            return (-3.0 * eval(t, x) + 4.0 * eval(t + h, x) - eval(t + 2.0 * h, x)) / (2.0 * h);
        }
        if (t + h > b) {
            return (3.0 * eval(t, x) - 4.0 * eval(t - h, x) + eval(t - 2.0 * h, x)) / (2.0 * h);
        }
        return (eval(t + h, x) - eval(t - h, x)) / (2.0 * h);
    }

    double richardson_derivative(double t, double x) const {
        const double coarse = difference(t, x, fd_step);
        const double fine = difference(t, x, 0.5 * fd_step);
        return (4.0 * fine - coarse) / 3.0;
    }
};

/// Rigid rotations g_t(x) = x + t.
inline MonotoneCircleFamily rigid_family(double a = 0.0, double b = 1.0) {
    return {"rigid", a, b, [](double t, double x) { return x + t; }, [](double, double) { return 1.0; }};
}

/// Rigid rotations with quadratic speed, g_t(x) = x + t^2 + t.
inline MonotoneCircleFamily rigid_quadratic_family(double a = 0.0, double b = 1.0) {
    return {"rigid-quadratic", a, b, [](double t, double x) { return x + t * t + t; },
            [](double t, double) { return 2.0 * t + 1.0; }};
}

/// Arnold family g_t(x) = x + t + (K / 2pi) sin(2pi x); a homeomorphism family for 0 <= K <= 1.
inline MonotoneCircleFamily arnold_family(double K, double a = 0.0, double b = 1.0) {
    if (!(K >= 0.0) || K > 1.0) {
        throw InvalidConfig("Arnold coupling K must lie in [0, 1]");
    }
    return {"arnold", a, b, [K](double t, double x) { return x + t + K / two_pi * std::sin(two_pi * x); },
            [](double, double) { return 1.0; }};
}

/// Lifts of f restricted to the invariant circles, indexed by inner radius t in [0, R - c].
/// Rotation numbers decrease in t.
inline MonotoneCircleFamily poncelet_family(double R, double c) {
    const PonceletConfig base{R, c, 0.0};
    auto eval = [base](double t, double x) { return tangent_lift(x, base.with_t(t)); };
    // d/dt of arc / 2pi = -1 / (pi sqrt(d^2 - t^2)) with d the distance from A to the center of L.
    auto partial = [base](double t, double x) {
        const double gap2 = tangent_gap_squared(two_pi * x, base.with_t(t));
        return -1.0 / (pi * std::sqrt(std::max(gap2, 0.0)));
    };
    return {"poncelet", 0.0, base.t_max(), eval, partial};
}

/// The same family traversed by s = -t, turning a decreasing family into an increasing one.
inline MonotoneCircleFamily reversed(const MonotoneCircleFamily& fam) {
    MonotoneCircleFamily out;
    out.name = fam.name + "-reversed";
    out.a = -fam.b;
    out.b = -fam.a;
    out.fd_step = fam.fd_step;
    out.eval = [fam](double s, double x) { return fam.eval(-s, x); };
    out.partial_t = [fam](double s, double x) { return -fam.derivative(-s, x); };
    return out;
}

} // namespace poncelet
