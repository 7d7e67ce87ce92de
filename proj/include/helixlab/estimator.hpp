#pragma once

#include <cstdint>
#include <vector>

#include "helixlab/fit.hpp"
#include "helixlab/kernel.hpp"
#include "helixlab/multiplier.hpp"

namespace helixlab {

/* Operator-norm bracket for one piece.  l2_norm is exact on the grid (the
 * transfer function sup), linf_upper is the kernel L1 surrogate, l4_lower is
 * the best Rayleigh quotient found by test functions, and interp_upper is
 * the geometric-mean upper bound sitting between them. */
struct NormRecord {
    double lambda = 0.0;
    int j = 0;
    int m = 0;
    double delta = 0.0;
    double alpha = 0.0;
    double l2_norm = 0.0;
    double linf_upper = 0.0;
    double l4_lower = 0.0;
    double interp_upper = 0.0;
    double kernel_l1 = 0.0;
    double mass_capture = 0.0;
    std::uint64_t seed = 0;
};

// sup over the lattice of |piece multiplier|: the exact grid L2 -> L2 norm
double norm_l2(const PieceIndex& p, GridSpec g, double tol = 1e-8);

/* |S f|_4 / |f|_4 for the operator with the given sampled multiplier, from
 * the frequency coefficients of f (0 when f vanishes). */
double rayleigh_l4(const SampledMultiplier& s, const SpectralField& fhat);

// sqrt(l2 * linf), the Riesz-Thorin midpoint upper bound for L4
double interpolation_bound(double l2, double linf);

/* Rayleigh L4 probe: `trials` random fields drawn inside the piece support
 * window plus one focusing (Knapp) field.  Deterministic given seed. */
struct L4Probe {
    double best = 0.0;         // max ratio over all test fields
    double best_random = 0.0;  // max over the random draws alone
    double knapp_value = 0.0;
    bool knapp_best = false;
};
L4Probe norm_l4_probe(const PieceIndex& p, GridSpec g, int trials,
                      std::uint64_t seed, double tol = 1e-8);
double norm_l4_lower(const PieceIndex& p, GridSpec g, int trials,
                     std::uint64_t seed, double tol = 1e-8);

// full bracket for one piece; one sampling pass shared by all the norms
NormRecord compute_norm_record(const PieceIndex& p, GridSpec g, int trials,
                               std::uint64_t seed, double tol = 1e-8,
                               L4Probe* probe_out = nullptr);

/* Square-function comparison for the sector family of (lambda, j):
 * lhs = |sum_m S_m f|_4, rhs = |(sum_m |S_m f|^2)^{1/2}|_4.  cs_margin is
 * lhs / (sqrt(count) * rhs), which Cauchy-Schwarz keeps <= 1; pointwise_max
 * is the worst lattice ratio of (sum |g_m|^2)^2 to count * sum |g_m|^4,
 * also <= 1 pointwise. */
struct SquareFunctionResult {
    double lhs = 0.0;
    double rhs = 0.0;
    int sectors = 0;
    double cs_margin = 0.0;
    double pointwise_max = 0.0;
};
SquareFunctionResult square_function_ratio(double lambda, int j, GridSpec g,
                                           const SpectralField& f,
                                           double tol = 1e-8);

/* Same comparison over an arbitrary caller-supplied family (used for the
 * one-piece degenerate case and disjoint-support controls, which no valid
 * PieceIndex family can reach). */
SquareFunctionResult square_function_pieces(
    const std::vector<SampledMultiplier>& family, const SpectralField& f);

// drops the per-(lambda, j, grid) sampling caches (tests, memory pressure)
void clear_shell_cache();

/* Empirical estimate of the square-function exponent: per (lambda, j) the
 * max of lhs/rhs over random and focusing fields, fitted against delta.
 * slope = tau_hat - 1/4 under the conjectured power law; sigma_hat = tau_hat/3.
 * An empirical lower-envelope estimate, not a proof. */
struct TauPoint {
    double lambda = 0.0;
    int j = 0;
    double delta = 0.0;
    double max_ratio = 0.0;
    double cs_margin = 0.0;
    double pointwise_max = 0.0;
};
struct TauEstimate {
    ExponentFit fit;
    double tau_hat = 0.0;
    double sigma_hat = 0.0;
    std::vector<TauPoint> points;
};
TauEstimate tau_estimate(const std::vector<std::pair<double, int>>& lambda_j,
                         double L, int trials, std::uint64_t seed,
                         double tol = 1e-8);

/* Angular square function alone: |(sum_m |f_m|^2)^{1/2}|_4 / |f|_4 with f_m
 * the smooth sector localizations at aperture delta (no radial factors). */
double cordoba_ratio(double delta, GridSpec g, const SpectralField& f);

/* Rayleigh L4 lower bound for the whole dyadic block S_lambda (conic collar
 * times dyadic cut times the symbol; the band family telescopes to 1 there). */
double slambda_norm_l4_lower(double lambda, GridSpec g, int trials,
                             std::uint64_t seed, double tol = 1e-8);

/* Exploratory: Rayleigh L4 sweep for the multiplier restricted smoothly to
 * the elliptic (ratio <= 0.99) or oscillatory (ratio >= 1.01, grid-clipped)
 * region and localized to the dyadic shell.  `control` replaces the symbol
 * by 1 to calibrate the probe (expected slope 0). */
struct RegionSweep {
    ExponentFit fit;
    std::vector<double> lambdas;
    std::vector<double> values;
};
RegionSweep elliptic_oscillatory_l4(Region region,
                                    const std::vector<double>& lambdas,
                                    GridSpec g, int trials, std::uint64_t seed,
                                    double tol = 1e-8, bool control = false);

}  // namespace helixlab
