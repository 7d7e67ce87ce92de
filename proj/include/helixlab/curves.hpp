#pragma once

#include "helixlab/vec3.hpp"

namespace helixlab {

/* Model curves with nonvanishing torsion.
 *   Helix:        gamma(t) = (cos t, sin t, t),   t in [-pi, pi]
 *   TwistedCubic: gamma(t) = (t, t^2, t^3),       t in [-3, 3]
 * det(gamma', gamma'', gamma''') is 1 for the helix and 12 for the cubic,
 * independent of t. */
enum class CurveKind { Helix, TwistedCubic };

struct Curve {
    CurveKind kind;
    double t_min, t_max;
};

Curve helix();
Curve twisted_cubic();

// k-th derivative of gamma at t, k in {0,1,2,3}; t must lie in the interval
Vec3 curve_eval(const Curve& c, double t, int order = 0);

// torsion numerator det(gamma'(t), gamma''(t), gamma'''(t))
double torsion_det(const Curve& c, double t);

/* Smooth bump supported on |t - center| < halfwidth,
 *   phi(t) = c * exp(-1 / (1 - ((t-center)/halfwidth)^2)),
 * with c chosen so the integral over the line is 1 (to 1e-10 under the
 * reference quadrature below). */
struct Cutoff {
    double center = 0.0;
    double halfwidth = 3.0;
};

double cutoff_value(const Cutoff& c, double t);

/* Cutoff with the core |t| <= 10*delta removed: 0 there, equal to the base
 * cutoff for |t| >= 20*delta, smooth ramp between (slope O(1/delta)).
 * Requires 0 < 20*delta < halfwidth. */
double trimmed_cutoff_value(const Cutoff& c, double delta, double t);

/* Reference quadrature used for normalization constants and oracles:
 * adaptive Simpson to ~1e-13 absolute.  Not oscillation-aware; for smooth
 * non-oscillatory integrands only. */
double reference_integral(double (*f)(double, const void*), const void* ctx,
                          double a, double b, double tol = 1e-13);

}  // namespace helixlab
