#pragma once

#include <complex>
#include <vector>

#include "helixlab/curves.hpp"
#include "helixlab/fit.hpp"
#include "helixlab/vec3.hpp"

namespace helixlab {

/* Convolution against the cutoff-weighted arclength measure on the helix has
 * the explicit symbol
 *     m(xi) = integral exp(i*psi(t)) phi(t) dt,
 *     psi(t) = -(xi1*cos t + xi2*sin t + xi3*t).
 * Its size is governed by the critical points of psi: none when |xi'| is
 * well below |xi3| (rapid decay), two nondegenerate ones when |xi'| is well
 * above |xi3| (|m| ~ |xi|^{-1/2}), and a transition along the cone
 * |xi'| = |xi3| where the two merge. */

enum class Region { Elliptic, Oscillatory, ConicA, Transition };

struct RegionSet {
    bool elliptic = false;
    bool oscillatory = false;
    bool conic_a = false;
    bool transition = false;

    bool contains(Region r) const {
        switch (r) {
            case Region::Elliptic: return elliptic;
            case Region::Oscillatory: return oscillatory;
            case Region::ConicA: return conic_a;
            default: return transition;
        }
    }
    int count() const {
        return int(elliptic) + int(oscillatory) + int(conic_a) + int(transition);
    }
};

/* Overlapping labels by the ratio rho = |xi'| / |xi3|:
 *   Elliptic     rho <= 0.99
 *   Oscillatory  rho >= 1.01
 *   ConicA       0.98 <= rho <= 1.02
 * Transition if none of the above applies.  xi = 0 is rejected. */
RegionSet classify_region(Vec3 xi);

double phase(Vec3 xi, double t);
// k-th derivative of the phase, k in {1, 2}
double phase_derivative(Vec3 xi, double t, int k);

/* Roots of psi'(t) = 0 in [a, b]: sign-change bracketing on a 256-cell grid,
 * then Newton refinement (bisection fallback) to residual
 * <= 1e-12 * max(1, |xi|). */
std::vector<double> critical_points(Vec3 xi, double a, double b);

struct MultiplierValue {
    std::complex<double> value{0.0, 0.0};
    double error_estimate = 0.0;
    int panels = 0;
};

/* Direct oscillation-aware quadrature of the symbol; tol is absolute. */
MultiplierValue multiplier_quadrature(Vec3 xi, const Cutoff& cut = Cutoff{},
                                      double tol = 1e-10);

/* Leading-order stationary phase:
 *   sum over critical points of
 *   phi(tc) exp(i psi(tc)) sqrt(2 pi / |psi''(tc)|) exp(i sgn(psi'') pi/4).
 * Requires |xi'| >= 1.01 |xi3| (two transversal critical points); throws
 * DegeneratePhase if |psi''(tc)| < 1e-6 |xi|. */
std::complex<double> multiplier_stationary_phase(Vec3 xi, const Cutoff& cut = Cutoff{});

/* |m| sampled along r*direction for each radius, then log-log fitted.
 * Radii must be increasing, at least 5 of them, all >= 10. */
ExponentFit decay_fit(Vec3 direction, const std::vector<double>& radii,
                      const Cutoff& cut = Cutoff{}, double tol = 1e-12);

}  // namespace helixlab
