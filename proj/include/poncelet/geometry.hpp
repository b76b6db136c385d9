#pragma once

// Poncelet billiard between two nested circles.
//
// K is the outer circle of radius R centered at the origin. L is the inner
// circle of radius t centered at (-c, 0). A state is a point A on K (angle
// theta) together with a line through A (direction phi, defined mod pi).
// The billiard sends (A, line) to (A', line') where A' is the second
// intersection of the line with K and line' is the other tangent from A'
// to the circle centered at (-c, 0) touching the incoming line.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "poncelet/errors.hpp"
#include "poncelet/quadrature.hpp"

namespace poncelet {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Representative of v modulo `period` in [0, period).
inline double reduce_mod(double v, double period) {
    double r = v - period * std::floor(v / period);
    if (r >= period) {
        r -= period;
    }
    if (r < 0.0) {
        r = 0.0;
    }
    return r;
}

/// Distance from a to b on the circle R/(period Z), in [0, period/2].
inline double circular_distance(double a, double b, double period) {
    return std::abs(std::remainder(a - b, period));
}

/// Outer radius R, center offset c, inner radius t of a nested circle pair.
class PonceletConfig {
public:
    PonceletConfig(double R, double c, double t = 0.0) : R_{R}, c_{c}, t_{t} {
        if (!(R > 0.0) || !std::isfinite(R)) {
            throw InvalidConfig("outer radius R must be positive and finite");
        }
        if (!(c >= 0.0) || !(c < R)) {
            throw InvalidConfig("center offset c must satisfy 0 <= c < R");
        }
        const double t_max = R - c;
        if (!(t >= 0.0) || t > t_max * (1.0 + 1e-14)) {
            std::ostringstream msg;
            msg << "inner radius t = " << t << " outside [0, R - c] = [0, " << t_max << "]";
            throw InvalidConfig(msg.str());
        }
        t_ = std::min(t, t_max);
    }

    double R() const noexcept { return R_; }
    double c() const noexcept { return c_; }
    double t() const noexcept { return t_; }
    double t_max() const noexcept { return R_ - c_; }

    PonceletConfig with_t(double t) const { return PonceletConfig{R_, c_, t}; }

private:
    double R_;
    double c_;
    double t_;
};

/// Position angle theta in [0, 2pi) and line direction phi in [0, pi).
struct AngleState {
    double theta = 0.0;
    double phi = 0.0;

    static AngleState reduced(double theta, double phi) {
        return {reduce_mod(theta, two_pi), reduce_mod(phi, pi)};
    }
};

/// Normalized torus coordinates x = theta / 2pi, y = phi / pi, both in [0, 1).
struct TorusPoint {
    double x = 0.0;
    double y = 0.0;

    static TorusPoint reduced(double x, double y) { return {reduce_mod(x, 1.0), reduce_mod(y, 1.0)}; }
};

/// Unwrapped plane coordinates of the lift.
struct LiftPoint {
    double x = 0.0;
    double y = 0.0;

    TorusPoint project() const { return TorusPoint::reduced(x, y); }
};

inline TorusPoint to_torus(const AngleState& s) {
    return TorusPoint::reduced(s.theta / two_pi, s.phi / pi);
}

inline AngleState to_angles(const TorusPoint& p) {
    return AngleState::reduced(two_pi * p.x, pi * p.y);
}

/// B(theta') = 2 arctan(c sin theta' / (R + c cos theta')), the branch with B(0) = 0.
inline double b_function(double theta_prime, const PonceletConfig& cfg) {
    const double c = cfg.c();
    return 2.0 * std::atan2(c * std::sin(theta_prime), cfg.R() + c * std::cos(theta_prime));
}

/// Z(s) = -B(2 pi s) / pi; 1-periodic and odd.
inline double z_function(double s, const PonceletConfig& cfg) {
    return -b_function(two_pi * s, cfg) / pi;
}

struct AnalyticStep {
    AngleState state;    ///< reduced image
    double theta_lift;   ///< 2 phi - theta + pi, unreduced
    double phi_lift;     ///< 3 phi - 2 theta - B(theta') + pi, unreduced
};

/// Analytic form of the billiard map on (theta, phi). Independent of t.
inline AnalyticStep poncelet_map_analytic(const AngleState& s, const PonceletConfig& cfg) {
    const double theta_next = 2.0 * s.phi - s.theta + pi;
    const double phi_next = 3.0 * s.phi - 2.0 * s.theta - b_function(theta_next, cfg) + pi;
    return {AngleState::reduced(theta_next, phi_next), theta_next, phi_next};
}

/// The twist map f on the lift: no reduction is applied.
inline LiftPoint twist_map(const LiftPoint& p, const PonceletConfig& cfg) {
    const double x_next = p.y - p.x + 0.5;
    return {x_next, 3.0 * p.y - 4.0 * p.x + z_function(x_next, cfg) + 1.0};
}

/// The twist map f on the torus.
inline TorusPoint twist_map(const TorusPoint& p, const PonceletConfig& cfg) {
    return twist_map(LiftPoint{p.x, p.y}, cfg).project();
}

/// f in the sheared coordinates (x, w) with w = y - 2x, in which the invariant
/// circles are graphs of 1-periodic functions:
///   (x, w) -> (x + w + 1/2, w + Z(x + w + 1/2)).
/// This lift satisfies F(x + 1, w) = F(x, w) + (1, 0) and dF_1/dw = 1. The raw
/// (x, y) formula instead shifts by the integer vector (-1, -4).
inline LiftPoint cylinder_map(const LiftPoint& p, const PonceletConfig& cfg) {
    const double x_next = p.x + p.y + 0.5;
    return {x_next, p.y + z_function(x_next, cfg)};
}

inline LiftPoint to_cylinder(const LiftPoint& p) { return {p.x, p.y - 2.0 * p.x}; }
inline LiftPoint from_cylinder(const LiftPoint& p) { return {p.x, p.y + 2.0 * p.x}; }

/// Result of one tangent-line step from the point of K at angle theta.
struct GeometricStep {
    double theta_next;  ///< theta + arc, unreduced
    double phi;         ///< direction of the tangent line through A, in [0, pi)
    double arc;         ///< counterclockwise arc from A to A', in [0, 2pi)
};

/// Tangent construction: the line through A = R e^{i theta} tangent to L with L
/// on its left when oriented from A to A', and its second intersection A' with K.
inline GeometricStep poncelet_map_geometric(double theta, const PonceletConfig& cfg) {
    const double R = cfg.R();
    const double t = cfg.t();
    const double ax = R * std::cos(theta);
    const double ay = R * std::sin(theta);
    const double vx = -cfg.c() - ax;
    const double vy = -ay;
    const double d = std::hypot(vx, vy);
    if (t > d * (1.0 + 1e-12)) {
        throw DegenerateTangency("point of K lies strictly inside the inner circle");
    }
    const double half_angle = std::asin(std::clamp(t / d, 0.0, 1.0));
    const double dir = std::atan2(vy, vx) - half_angle;
    const double ux = std::cos(dir);
    const double uy = std::sin(dir);
    // Tangent-chord angle: the arc is twice the angle from the ccw tangent of K at A to the chord.
    const double tx = -std::sin(theta);
    const double ty = std::cos(theta);
    const double cross = std::max(0.0, tx * uy - ty * ux);
    const double dot = tx * ux + ty * uy;
    const double arc = 2.0 * std::atan2(cross, dot);
    return {theta + arc, reduce_mod(dir, pi), arc};
}

/// d^2 - t^2 with d = |A - center of L|, written to stay accurate near tangency:
/// d^2 = (R - c)^2 + 4 R c cos^2(theta / 2).
inline double tangent_gap_squared(double theta, const PonceletConfig& cfg) {
    const double R = cfg.R();
    const double c = cfg.c();
    const double t = cfg.t();
    const double h = std::cos(0.5 * theta);
    return (R - c - t) * (R - c + t) + 4.0 * R * c * h * h;
}

/// Counterclockwise arc of the tangent step from angle theta, in closed form:
/// arc = pi - B(theta) - 2 asin(t / d) = 2 atan2(sqrt(d^2 - t^2), t) - B(theta).
inline double tangent_arc(double theta, const PonceletConfig& cfg) {
    const double gap2 = tangent_gap_squared(theta, cfg);
    if (gap2 < -1e-12 * cfg.R() * cfg.R()) {
        throw DegenerateTangency("point of K lies strictly inside the inner circle");
    }
    const double arc = 2.0 * std::atan2(std::sqrt(std::max(gap2, 0.0)), cfg.t()) - b_function(theta, cfg);
    return std::max(arc, 0.0);
}

/// Lift of f restricted to the invariant circle of radius cfg.t(): x -> x + arc / 2pi.
inline double tangent_lift(double x, const PonceletConfig& cfg) {
    return x + tangent_arc(two_pi * reduce_mod(x, 1.0), cfg) / two_pi;
}

/// Graph x -> y of the invariant rotational circle of radius t.
class InvariantCircle {
public:
    explicit InvariantCircle(PonceletConfig cfg) : cfg_{cfg} {}

    /// y(x) in [0, 1).
    double operator()(double x) const {
        return reduce_mod(poncelet_map_geometric(two_pi * x, cfg_).phi / pi, 1.0);
    }

    /// Circular distance of the torus point p from the graph.
    double residual(const TorusPoint& p) const { return circular_distance(p.y, (*this)(p.x), 1.0); }

    const PonceletConfig& config() const noexcept { return cfg_; }

private:
    PonceletConfig cfg_;
};

inline InvariantCircle invariant_circle_phi(const PonceletConfig& cfg) { return InvariantCircle{cfg}; }

/// H(x') = integral of Z over [0, x'].
inline double potential_primitive(double x_prime, const PonceletConfig& cfg, double tol = 1e-12) {
    if (cfg.c() == 0.0) {
        return 0.0;
    }
    return quadrature::adaptive_simpson([&cfg](double s) { return z_function(s, cfg); }, 0.0, x_prime, tol);
}

/// Generating potential h(x, x') of the twist map, with H(0) = 0.
inline double generating_potential(double x, double x_prime, const PonceletConfig& cfg) {
    return -x * x_prime - (x * x - x) / 2.0 + (3.0 * x_prime * x_prime - x_prime) / 2.0 +
           potential_primitive(x_prime, cfg);
}

struct AreaTwist {
    double jacobian_det;
    double twist_partial;  ///< d f_1 / d y
};

/// Centered finite-difference Jacobian determinant and twist partial of f at p.
inline AreaTwist area_twist_check(const TorusPoint& p, const PonceletConfig& cfg, double h = 1e-6) {
    auto f = [&cfg](double x, double y) { return twist_map(LiftPoint{x, y}, cfg); };
    const LiftPoint xp = f(p.x + h, p.y);
    const LiftPoint xm = f(p.x - h, p.y);
    const LiftPoint yp = f(p.x, p.y + h);
    const LiftPoint ym = f(p.x, p.y - h);
    const double a = (xp.x - xm.x) / (2.0 * h);
    const double b = (yp.x - ym.x) / (2.0 * h);
    const double cc = (xp.y - xm.y) / (2.0 * h);
    const double d = (yp.y - ym.y) / (2.0 * h);
    return {a * d - b * cc, b};
}

} // namespace poncelet
