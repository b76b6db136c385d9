#pragma once

// Continued fractions: expansions with unbounded convergents, the Gauss map,
// the Fibonacci-reciprocal constant F, remainder records of the log-sum
// identity for q_n, and balanced excess/defect approximation pairs.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "poncelet/errors.hpp"

namespace poncelet {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// p / q with q > 0.
struct Convergent {
    BigInt p;
    BigInt q;

    Rational value() const { return Rational{p, q}; }
    double approx() const { return to_double(p) / to_double(q); }

    static double to_double(const BigInt& v) { return v.convert_to<double>(); }
};

struct ContinuedFractionExpansion {
    BigInt a0;
    std::vector<BigInt> partial_quotients;  ///< a_1, a_2, ...
    std::vector<Convergent> convergents;    ///< p_n / q_n for n = 0 .. partial_quotients.size()
    bool terminated = false;                ///< the expansion is finite and complete
    bool precision_limited = false;         ///< stopped because the next quotient was not certified

    std::size_t size() const { return convergents.size(); }
    const Convergent& operator[](std::size_t n) const { return convergents.at(n); }
};

/// Exact value of a finite double.
inline Rational exact_rational(double x) {
    if (!std::isfinite(x)) {
        throw InvalidConfig("cannot represent a non-finite value as a rational");
    }
    return Rational{x};
}

inline BigInt floor_of(const Rational& x) {
    const BigInt& num = boost::multiprecision::numerator(x);
    const BigInt& den = boost::multiprecision::denominator(x);
    BigInt q = num / den;
    if (num < 0 && q * den != num) {
        q -= 1;
    }
    return q;
}

namespace detail {

class ConvergentBuilder {
public:
    explicit ConvergentBuilder(ContinuedFractionExpansion& out) : out_{out} {}

    void push(const BigInt& a) {
        BigInt p = a * p1_ + p2_;
        BigInt q = a * q1_ + q2_;
        p2_ = p1_;
        q2_ = q1_;
        p1_ = p;
        q1_ = q;
        if (out_.convergents.empty()) {
            out_.a0 = a;
        } else {
            out_.partial_quotients.push_back(a);
        }
        out_.convergents.push_back({std::move(p), std::move(q)});
    }

private:
    ContinuedFractionExpansion& out_;
    BigInt p1_{1}, q1_{0}, p2_{0}, q2_{1};
};

} // namespace detail

/// Expansion of an exact rational; at most n_terms convergents, fewer when it terminates.
inline ContinuedFractionExpansion cf_expand(Rational x, std::size_t n_terms) {
    if (n_terms == 0) {
        throw InvalidConfig("continued fraction needs at least one term");
    }
    ContinuedFractionExpansion out;
    detail::ConvergentBuilder build{out};
    while (out.size() < n_terms) {
        const BigInt a = floor_of(x);
        build.push(a);
        x -= Rational{a};
        if (x == 0) {
            out.terminated = true;
            break;
        }
        x = 1 / x;
    }
    return out;
}

enum class Exhaustion { truncate, raise };

/// Expansion shared by every real number in [lo, hi]; both endpoints are expanded in lockstep.
inline ContinuedFractionExpansion cf_expand_interval(Rational lo, Rational hi, std::size_t n_terms) {
    ContinuedFractionExpansion out;
    detail::ConvergentBuilder build{out};
    while (out.size() < n_terms) {
        const BigInt a_lo = floor_of(lo);
        const BigInt a_hi = floor_of(hi);
        if (a_lo != a_hi) {
            out.precision_limited = true;
            break;
        }
        build.push(a_lo);
        lo -= Rational{a_lo};
        hi -= Rational{a_lo};
        if (lo == 0 || hi == 0) {
            out.precision_limited = true;
            break;
        }
        lo = 1 / lo;
        hi = 1 / hi;
    }
    return out;
}

/// Expansion of a floating value, keeping only quotients shared by every real
/// number within `slack_ulps` ulps of x.
inline ContinuedFractionExpansion cf_expand(double x, std::size_t n_terms, Exhaustion policy = Exhaustion::raise,
                                            int slack_ulps = 2) {
    if (n_terms == 0) {
        throw InvalidConfig("continued fraction needs at least one term");
    }
    double lo = x;
    double hi = x;
    for (int i = 0; i < slack_ulps; ++i) {
        lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
        hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
    }
    auto out = cf_expand_interval(exact_rational(lo), exact_rational(hi), n_terms);
    if (out.precision_limited && policy == Exhaustion::raise) {
        throw PrecisionExhausted("floating input certifies only " + std::to_string(out.size()) + " of " +
                                 std::to_string(n_terms) + " requested convergents");
    }
    return out;
}

/// T(x) = 1/x - floor(1/x), T(0) = 0.
inline double gauss_map(double x) {
    if (!(x >= 0.0) || !(x < 1.0)) {
        throw InvalidConfig("Gauss map is defined on [0, 1)");
    }
    if (x == 0.0) {
        return 0.0;
    }
    const double inv = 1.0 / x;
    return inv - std::floor(inv);
}

inline Rational gauss_map(const Rational& x) {
    if (x < 0 || x >= 1) {
        throw InvalidConfig("Gauss map is defined on [0, 1)");
    }
    if (x == 0) {
        return Rational{0};
    }
    Rational inv = 1 / x;
    return inv - Rational{floor_of(inv)};
}

/// 1/1 + 1/1 + 1/2 + 1/3 + 1/5 + ... over the first `terms` Fibonacci numbers.
inline double fibonacci_partial_sum(std::size_t terms) {
    std::vector<long double> recips;
    long double a = 1.0L;
    long double b = 1.0L;
    for (std::size_t i = 0; i < terms; ++i) {
        recips.push_back(1.0L / a);
        const long double next = a + b;
        a = b;
        b = next;
    }
    long double sum = 0.0L;
    for (auto it = recips.rbegin(); it != recips.rend(); ++it) {
        sum += *it;
    }
    return static_cast<double>(sum);
}

/// Sum of reciprocal Fibonacci numbers, truncated once the omitted tail is below tol.
/// The tail after a term u is at most u (1 + 1/phi + 1/phi^2 + ...) < 3u.
inline double fibonacci_reciprocal_sum(double tol = 1e-15) {
    if (!(tol > 0.0)) {
        throw InvalidConfig("tolerance must be positive");
    }
    std::size_t terms = 0;
    double a = 1.0;
    double b = 1.0;
    while (3.0 / a >= tol) {
        ++terms;
        const double next = a + b;
        a = b;
        b = next;
    }
    return fibonacci_partial_sum(terms);
}

/// F, computed once to 1e-15.
inline double fibonacci_constant() {
    static const double value = fibonacci_reciprocal_sum(1e-15);
    return value;
}

/// K_eps = (1 - eps) / (e^{2F} (1 + (1 + eps) e^{2F})^2).
inline double k_epsilon(double eps, double F = fibonacci_constant()) {
    if (!(eps > 0.0) || !(eps < 1.0)) {
        throw InvalidConfig("epsilon must lie in (0, 1)");
    }
    const double e2f = std::exp(2.0 * F);
    const double inner = 1.0 + (1.0 + eps) * e2f;
    return (1.0 - eps) / (e2f * inner * inner);
}

/// m^2 / (e^{2F} (1 + e^{2F})^2), the eps -> 0 limit of K_eps scaled by m^2.
inline double second_order_bound(double m, double F = fibonacci_constant()) {
    const double e2f = std::exp(2.0 * F);
    const double inner = 1.0 + e2f;
    return m * m / (e2f * inner * inner);
}

struct RemainderRecord {
    std::size_t n = 0;
    double log_qn = 0.0;
    double gauss_sum = 0.0;       ///< sum_{i < n} log T^i(x)
    double log_gauss_point = 0.0; ///< log T^n(x)
    double remainder = 0.0;       ///< R(n, x) = -log q_n - gauss_sum
    bool within_bound = true;     ///< |R(n, x)| <= F
};

struct RemainderSeries {
    double x = 0.0;
    ContinuedFractionExpansion expansion;
    std::vector<RemainderRecord> records;
    std::size_t violations = 0;
};

/// Records for n = 1 .. n_max (limited by the certified quotients of x).
/// The Gauss orbit is evaluated exactly on the rational value of x and only logs are floating.
inline RemainderSeries remainder_series(double x, std::size_t n_max, double F = fibonacci_constant()) {
    if (!(x > 0.0) || !(x < 1.0)) {
        throw InvalidConfig("remainder series needs x in (0, 1)");
    }
    RemainderSeries out;
    out.x = x;
    out.expansion = cf_expand(x, n_max + 2, Exhaustion::truncate);

    // T^n(x) is certified as a real-number quantity only while a_{n+1} is.
    const std::size_t usable = out.expansion.size() >= 2 ? std::min(n_max, out.expansion.size() - 2) : 0;
    Rational orbit = exact_rational(x);
    double gauss_sum = 0.0;
    for (std::size_t n = 1; n <= usable; ++n) {
        gauss_sum += std::log(orbit.convert_to<double>());
        orbit = gauss_map(orbit);
        RemainderRecord rec;
        rec.n = n;
        rec.log_qn = std::log(Convergent::to_double(out.expansion[n].q));
        rec.gauss_sum = gauss_sum;
        rec.log_gauss_point = std::log(orbit.convert_to<double>());
        rec.remainder = -rec.log_qn - gauss_sum;
        rec.within_bound = std::abs(rec.remainder) <= F;
        if (!rec.within_bound) {
            ++out.violations;
        }
        out.records.push_back(rec);
    }
    return out;
}

struct ApproximationPair {
    std::size_t index = 0;  ///< n_k: the pair is convergents n_k and n_k + 1
    Convergent excess;      ///< p / q >= x
    Convergent defect;      ///< p' / q' <= x
    double epsilon = 0.0;
    double ratio = 0.0;     ///< q_{n_k + 1} / q_{n_k}
    bool gap_flag = false;  ///< p/q - p'/q' >= K_eps (1/q + 1/q')^2
};

/// Index pairs (n, n + 1) of consecutive convergents whose denominator ratio lies in
/// (2 e^{-2F} / (1 + eps), 2 e^{2F} / (1 - eps)), oriented into (excess, defect) by
/// parity: for odd n the n-th convergent is the excess one.
inline std::vector<ApproximationPair> find_balanced_pairs(double x, double eps, std::size_t n_max,
                                                          double F = fibonacci_constant()) {
    if (!(eps > 0.0) || !(eps < 1.0)) {
        throw InvalidConfig("epsilon must lie in (0, 1)");
    }
    const auto cf = cf_expand(x, n_max + 3, Exhaustion::truncate);
    const double lower = 2.0 * std::exp(-2.0 * F) / (1.0 + eps);
    const double upper = 2.0 * std::exp(2.0 * F) / (1.0 - eps);
    const double k = k_epsilon(eps, F);

    std::vector<ApproximationPair> pairs;
    // Convergent n + 1 keeps its side of x only while a_{n + 2} is certified.
    for (std::size_t n = 1; n + 2 < cf.size() && n <= n_max; ++n) {
        const Convergent& c0 = cf[n];
        const Convergent& c1 = cf[n + 1];
        const double ratio = Rational{c1.q, c0.q}.convert_to<double>();
        if (!(ratio > lower && ratio < upper)) {
            continue;
        }
        ApproximationPair pair;
        pair.index = n;
        pair.epsilon = eps;
        pair.ratio = ratio;
        pair.excess = n % 2 == 1 ? c0 : c1;
        pair.defect = n % 2 == 1 ? c1 : c0;
        const auto& [p, q] = pair.excess;
        const auto& [pd, qd] = pair.defect;
        const double gap = Convergent::to_double(p * qd - q * pd) / Convergent::to_double(q * qd);
        const double inv_sum = 1.0 / Convergent::to_double(q) + 1.0 / Convergent::to_double(qd);
        pair.gap_flag = gap >= k * inv_sum * inv_sum;
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

/// Decimal string of an unbounded integer.
inline std::string to_string(const BigInt& v) { return v.str(); }

} // namespace poncelet
