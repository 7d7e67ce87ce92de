#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "helixlab/grid.hpp"

namespace helixlab {

/* Shear adapted to a sector of opening delta: straightens the piece kernel
 * so its anisotropy axes align with the coordinate axes. */
struct ShearMap {
    double delta;
    double alpha;  // (1 + delta^2)^{-1}

    explicit ShearMap(double delta_)
        : delta(delta_), alpha(1.0 / (1.0 + delta_ * delta_)) {}

    Vec3 forward(Vec3 x) const {
        return {x.x, x.y + alpha * x.z, alpha * x.z - x.y};
    }
    Vec3 inverse(Vec3 y) const {
        return {y.x, 0.5 * (y.y - y.z), 0.5 * (y.y + y.z) / alpha};
    }
    // constant determinant of the forward map
    double jacobian() const { return 2.0 * alpha; }
};

Vec3 shear_coordinates(Vec3 x, double delta);

// the largest |component| a piece at scale lambda can reach (2% above 2*lambda)
double piece_frequency_extent(double lambda);

// true when the piece support (and a one-step margin) fits inside Nyquist
bool piece_fits(const PieceIndex& p, const GridSpec& g);

/* Lattice samples of a multiplier restricted to its support: flat storage
 * indices plus the (weight * symbol) values there; everything off the list
 * is exactly zero. */
struct SampledMultiplier {
    GridSpec grid;
    std::vector<std::size_t> index;
    std::vector<std::complex<double>> value;
    double sup_abs = 0.0;

    explicit SampledMultiplier(GridSpec g) : grid(g) {}
};

/* Samples weight(xi) * m(xi) over the lattice slab xi3 in [xi3_min, xi3_max],
 * running the symbol quadrature only where the weight is nonzero. */
SampledMultiplier sample_multiplier(GridSpec g,
                                    const std::function<double(Vec3)>& weight,
                                    double tol, double xi3_min, double xi3_max);

// weight alone, symbol replaced by 1 (control runs and partition checks)
SampledMultiplier sample_weight(GridSpec g,
                                const std::function<double(Vec3)>& weight,
                                double xi3_min, double xi3_max);

/* Smallest power-of-two grid (n >= n_min) whose Nyquist range holds a piece
 * at scale lambda, at fixed box size L; throws std::invalid_argument past
 * n_cap.  The lattice spacing depends only on L, so this trades extent for
 * cost, not resolution. */
GridSpec grid_for_lambda(double lambda, double L, int n_min = 64,
                         int n_cap = 4096);

/* Grid whose box shrinks with lambda so the conic collar stays resolved:
 * L = 384/lambda puts ~2.4 lattice cells across the collar width
 * 0.04*lambda at every scale, and n = 256 always just clears the piece
 * extent.  Fixed-box grids drop the collar below one cell for lambda
 * under ~50, which smears kernels and focusing boxes; use this grid for
 * any measurement that depends on the radial profile. */
GridSpec collar_grid(double lambda, int n = 256);

// the piece version; throws std::invalid_argument unless piece_fits
SampledMultiplier sample_piece(const PieceIndex& p, GridSpec g, double tol);

// frequency field with the sampled values scattered onto the lattice
SpectralField scatter(const SampledMultiplier& s);

/* Physical-space convolution kernel of the piece: unitary inverse transform
 * of the lattice-sampled piece multiplier. */
SpectralField kernel_field(const PieceIndex& p, GridSpec g, double tol);

struct KernelEstimate {
    double l1_norm = 0.0;       // Riemann L1 of the physical kernel
    double mass_capture = 0.0;  // |K| mass fraction in the central half-volume box
    double sup_symbol = 0.0;    // max |multiplier| over the lattice
    bool low_confidence = false;
};

/* L1 norm of the physical kernel K(x) = (1/L^3) sum_k m_k e^{i xi_k . x}:
 * the unitary-transform samples are rescaled by n^{3/2}/L^3 and summed with
 * cell volume (L/n)^3.  mass_capture < 0.95 sets low_confidence (typical
 * cause: kernel tails wrapping around the torus). */
KernelEstimate kernel_l1_norm(const PieceIndex& p, GridSpec g, double tol);

// same estimate from an already-sampled multiplier (shared with sweeps)
KernelEstimate kernel_l1_from_samples(const SampledMultiplier& s);

/* Piece kernel L1 in a sector-adapted affine frame.  The conic collar ramp
 * (relative width 0.005) makes the physical kernel a needle along the cone
 * normal with a 1/r mass tail reaching ~4000/lambda: a cube holding 95% of
 * its mass would need ~2800^3 lattice points at any box size, so the cubic
 * estimate above is always truncated and flags itself.  This variant
 * samples the symbol on the image of a rectangular lattice under (sector
 * rotation) o (cone-normal shear) o (per-axis scaling) fitted to the piece
 * support, which aligns the needle with a single lattice axis.  The map is
 * affine with constant Jacobian, so the lattice Riemann L1 equals the
 * physical L1 exactly; per-axis extents follow measured tail constants,
 * each axis is critically sampled and zero-padded by `density` for the
 * Riemann sum, and `box` scales the physical extents (periods) held by the
 * lattice.  Results are cached on the full argument tuple. */
KernelEstimate kernel_l1_sheared(const PieceIndex& p, double tol = 1e-6,
                                 double box = 1.0, double density = 2.0);

}  // namespace helixlab
