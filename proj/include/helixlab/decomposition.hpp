#pragma once

#include <complex>
#include <utility>

#include "helixlab/vec3.hpp"

namespace helixlab {

/* Frequency-space partition machinery.  A piece at dyadic scale lambda,
 * band index j and sector index m is supported where
 *   - xi3 ~ lambda                        (dyadic_weight)
 *   - |xi'|/xi3 is within 2% of 1        (conic_A_weight)
 *   - (|xi'|/xi3 - 1) * lambda^{2/3} ~ 2^j  (band_weight)
 *   - the angle of xi' is in sector m     (sector_weight)
 * and carries the opening delta = 2^{|j|/2} lambda^{-1/3}.  Each family is a
 * smooth partition of unity on its region, so the pieces reconstruct the
 * conic/dyadic localization exactly. */

/* C-infinity monotone step: 0 for x <= 0, 1 for x >= 1, built from
 * exp(-1/x); satisfies smooth_step(x) + smooth_step(1-x) = 1. */
double smooth_step(double x);

/* 1 for 0.985 <= |xi'|/xi3 <= 1.015, 0 outside [0.98, 1.02] or when
 * xi3 <= 0; depends only on the ratio (homogeneous of degree 0). */
double conic_A_weight(Vec3 xi);

/* Smooth dyadic localization in xi3: support (3/4 lambda, 2 lambda),
 * identically 1 on [lambda, 3/2 lambda], and telescoping over
 * lambda in {2, 4, 8, ...} to 1 for every xi3 >= 2.  Requires lambda >= 2. */
double dyadic_weight(double lambda, double xi3);

/* Valid band indices (j_min, j_max) at scale lambda: j_max is
 * ceil(log2(0.02 * lambda^{2/3})) when that is >= 1, else 0 (single central
 * band), and j_min = -j_max. */
std::pair<int, int> band_range(double lambda);

/* Smooth band localization in the rescaled cone distance
 * w = (|xi'|/xi3 - 1) * lambda^{2/3}: the j = 0 band covers |w| <= 1, the
 * j >= 1 band covers w ~ 2^j (mirrored for j <= -1), with half-octave
 * transitions; the family over band_range sums to 1 for |w| <= 2^{j_max}.
 * j outside band_range is rejected. */
double band_weight(double lambda, int j, Vec3 xi);

// sector opening delta = 2^{|j|/2} * lambda^{-1/3}
double piece_delta(double lambda, int j);

/* Number of angular sectors covering the full circle at aperture ~delta:
 * max(1, round(2*pi/delta)). */
int sector_count(double lambda, int j);

/* Smooth angular partition of the xi' plane into `count` equal sectors
 * centered at theta_m = m * 2*pi/count: plateau of half the aperture,
 * transitions overlapping the neighbours, sum over m identically 1.
 * Used directly by the angular square-function experiments. */
double angular_sector_weight(int count, int m, Vec3 xi);

/* The same sector weight as a function of the polar angle of xi' alone
 * (cheap re-evaluation when the angle is already known). */
double sector_profile(int count, int m, double theta);

// sector weight for the (lambda, j) family
double sector_weight(double lambda, int j, int m, Vec3 xi);

struct PieceIndex {
    double lambda;
    int j;
    int m;

    /* Validates: lambda >= 2, j within band_range(lambda),
     * delta <= 0.5 (so lambda >= 8 in practice), 0 <= m < sectors(). */
    PieceIndex(double lambda, int j, int m);

    double delta() const;
    double alpha() const;  // (1 + delta^2)^{-1}, the shear parameter
    int sectors() const;

    /* The bookkeeping sector count N = max(1, round(1/delta)) used as the
     * x-variable of square-function fits; the geometric count above is
     * 2*pi times denser. */
    int bookkeeping_count() const;
};

// product of the four localization weights at xi (no symbol factor)
double piece_weight(const PieceIndex& p, Vec3 xi);

/* Full piece symbol: piece_weight * m(xi), where m is the helix symbol
 * evaluated by quadrature (absolute tolerance tol).  Exactly 0 outside the
 * weight support, so no quadrature runs there. */
std::complex<double> piece_multiplier(const PieceIndex& p, Vec3 xi, double tol = 1e-8);

}  // namespace helixlab
