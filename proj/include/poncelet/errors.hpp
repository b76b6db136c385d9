#pragma once

#include <stdexcept>
#include <string>

namespace poncelet {

/// Invalid geometry or parameter input.
class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A lift handed to the rotation machinery is not monotone or not 1-periodic.
class ContractViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The start point of a tangent construction lies strictly inside L.
class DegenerateTangency : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Target rotation value is not in the image of r over the bracket.
class NoSolution : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bisection converged but the lock certificate could not be confirmed.
class ResidualFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Floating input cannot certify the next continued-fraction quotient.
class PrecisionExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerically checked property (monotonicity, twist, porism, count) failed.
class PropertyFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace poncelet
