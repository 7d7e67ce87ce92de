#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "helixlab/decomposition.hpp"
#include "helixlab/vec3.hpp"

namespace helixlab {

/* Periodic lattice [0, L)^3 with n points per axis (n a power of two,
 * n >= 16) and the dual frequency lattice (2*pi/L) * {-n/2, ..., n/2-1}^3.
 * Transforms are unitary, so the l2 norm of the samples is preserved
 * exactly up to rounding. */
struct GridSpec {
    int n;
    double L;

    GridSpec(int n, double L);

    std::size_t points() const { return std::size_t(n) * n * n; }
    double spacing() const { return L / n; }
    double cell_volume() const { return spacing() * spacing() * spacing(); }
    double freq_step() const { return 2.0 * M_PI / L; }
    double nyquist() const { return M_PI * n / L; }

    // signed frequency index for storage index k in [0, n)
    int signed_index(int k) const { return (k < n / 2) ? k : k - n; }

    // row-major storage, k3 fastest (FFTW layout)
    std::size_t flat(int k1, int k2, int k3) const {
        return (std::size_t(k1) * n + k2) * n + k3;
    }

    Vec3 xi(int k1, int k2, int k3) const {
        double h = freq_step();
        return {h * signed_index(k1), h * signed_index(k2), h * signed_index(k3)};
    }

    // physical point of storage index, mapped to [-L/2, L/2)
    Vec3 x(int i1, int i2, int i3) const {
        double h = spacing();
        return {h * signed_index(i1), h * signed_index(i2), h * signed_index(i3)};
    }

    bool operator==(const GridSpec&) const = default;
};

enum class Rep { Physical, Frequency };

struct SpectralField {
    GridSpec grid;
    Rep rep = Rep::Physical;
    std::uint64_t seed = 0;  // provenance for randomly generated fields
    std::vector<std::complex<double>> data;

    SpectralField(GridSpec g, Rep r) : grid(g), rep(r), data(g.points()) {}
};

/* In-place unitary transforms (FFTW, FFTW_ESTIMATE plans so reruns are
 * bit-identical).  forward: physical -> frequency; inverse: the reverse.
 * Calling the wrong direction for the field's representation throws
 * std::logic_error. */
void forward_transform(SpectralField& f);
void inverse_transform(SpectralField& f);

/* Unnormalized in-place DFT on a rectangular n1 x n2 x n3 lattice (row-major,
 * index (i1*n2 + i2)*n3 + i3).  Kernel estimates on piece-adapted frames need
 * very unequal axis counts, which SpectralField's cubic lattice cannot host.
 * data.size() must equal n1*n2*n3; sign is FFTW_FORWARD / FFTW_BACKWARD. */
void rectangular_fft(std::vector<std::complex<double>>& data, int n1, int n2,
                     int n3, int sign);

/* Fourier multiplier operator: transform, multiply by m(xi) on the lattice,
 * transform back.  f must be physical. */
void apply_multiplier(SpectralField& f,
                      const std::function<std::complex<double>(Vec3)>& m);

/* (sum |f|^p * cell_volume)^(1/p) for finite p >= 1; max |f| for
 * p = infinity.  Physical representation required. */
double lp_norm(const SpectralField& f, double p);

/* Lp norm of the field filtered by (1 + |xi|^2)^(s/2). */
double sobolev_norm(const SpectralField& f, double s, double p);

struct FrequencyBand {
    double abs_min = 0.0;
    double abs_max = std::numeric_limits<double>::infinity();
    double xi3_min = -std::numeric_limits<double>::infinity();
    double xi3_max = std::numeric_limits<double>::infinity();
    double ratio_min = 0.0;  // |xi'| / xi3 window, applied only when xi3 > 0
    double ratio_max = std::numeric_limits<double>::infinity();
    double theta_center = 0.0;  // polar-angle window on xi', off by default
    double theta_half = std::numeric_limits<double>::infinity();

    bool contains(Vec3 xi) const;
};

struct RandomFieldResult {
    SpectralField field;
    long support_points = 0;
    bool empty_band = false;  // flagged, not thrown: band misses the lattice
};

/* Complex Gaussian coefficients on the lattice points inside the band,
 * normalized to lp_norm(., 2) = 1, returned in physical representation.
 * Fully determined by (key, lattice index) via the counter RNG. */
RandomFieldResult random_test_field(GridSpec g, const FrequencyBand& band,
                                    std::uint64_t key);

/* Same draw, left unnormalized in frequency representation (ratios of norms
 * of derived fields do not need the normalization, and callers that filter
 * the coefficients save a transform round trip). */
RandomFieldResult random_frequency_field(GridSpec g, const FrequencyBand& band,
                                         std::uint64_t key);

/* Focusing test field for a piece: smoothed indicator of a frequency box of
 * sides ~ lambda x lambda*delta x lambda*delta^2 aligned with the sector
 * (cone generator / tangential / cone normal), sitting inside the piece
 * plateau; inverse transformed and normalized to lp_norm(., 4) = 1. */
SpectralField knapp_field(const PieceIndex& p, GridSpec g);

/* Raw little-endian complex64 samples at `path` plus a text header at
 * `path.hdr` recording n, L, representation and seed. */
void save_field(const SpectralField& f, const std::string& path);
SpectralField load_field(const std::string& path);

}  // namespace helixlab
