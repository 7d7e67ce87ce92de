#pragma once

#include <stdexcept>
#include <string>

namespace helixlab {

/* Numeric failure: a computation ran but could not reach its requested
 * accuracy (quadrature budget exhausted, root refinement stalled, ...).
 * Distinct from std::invalid_argument, which flags bad inputs, and from
 * std::logic_error, which flags misuse of an object's state. */
class NumericFailure : public std::runtime_error {
public:
    NumericFailure(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_error(achieved) {}
    double achieved_error;  // best error estimate at the point of failure
};

/* Stationary-phase expansion hit a (nearly) degenerate critical point:
 * |psi''(tc)| below threshold relative to |xi|. */
class DegeneratePhase : public NumericFailure {
public:
    DegeneratePhase(const std::string& what, double second_derivative)
        : NumericFailure(what, second_derivative) {}
};

}  // namespace helixlab
