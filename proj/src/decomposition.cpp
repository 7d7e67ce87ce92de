#include "helixlab/decomposition.hpp"

#include <cmath>
#include <stdexcept>

#include "helixlab/multiplier.hpp"

namespace helixlab {

double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double a = std::exp(-1.0 / x);
    double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

double conic_A_weight(Vec3 xi) {
    if (xi.z <= 0.0) return 0.0;
    double rho = xi.perp_norm() / xi.z;
    return smooth_step((rho - 0.98) / 0.005) * smooth_step((1.02 - rho) / 0.005);
}

namespace {

// step rising over [3/4, 1], for the dyadic telescope
double dyadic_step(double u) { return smooth_step((u - 0.75) / 0.25); }

// step rising over [1, sqrt(2)], for the half-octave band transitions
double band_step(double u) { return smooth_step((u - 1.0) / (M_SQRT2 - 1.0)); }

}  // namespace

double dyadic_weight(double lambda, double xi3) {
    if (!(lambda >= 2.0))
        throw std::invalid_argument("dyadic_weight: need lambda >= 2");
    return dyadic_step(xi3 / lambda) - dyadic_step(xi3 / (2.0 * lambda));
}

std::pair<int, int> band_range(double lambda) {
    if (!(lambda >= 2.0))
        throw std::invalid_argument("band_range: need lambda >= 2");
    double width = 0.02 * std::pow(lambda, 2.0 / 3.0);  // |w| extent of the collar
    if (width <= 1.0) return {0, 0};
    int jmax = static_cast<int>(std::ceil(std::log2(width)));
    return {-jmax, jmax};
}

double band_weight(double lambda, int j, Vec3 xi) {
    auto [jmin, jmax] = band_range(lambda);
    if (j < jmin || j > jmax)
        throw std::invalid_argument("band_weight: j outside band_range");
    if (xi.z <= 0.0) return 0.0;
    double w = (xi.perp_norm() / xi.z - 1.0) * std::pow(lambda, 2.0 / 3.0);
    if (j == 0) return 1.0 - band_step(std::fabs(w));
    double side = (j > 0) ? w : -w;
    int aj = std::abs(j);
    return band_step(side / std::exp2(aj - 1)) - band_step(side / std::exp2(aj));
}

double piece_delta(double lambda, int j) {
    return std::exp2(std::abs(j) / 2.0) * std::pow(lambda, -1.0 / 3.0);
}

int sector_count(double lambda, int j) {
    double delta = piece_delta(lambda, j);
    return std::max(1, static_cast<int>(std::lround(2.0 * M_PI / delta)));
}

double sector_profile(int count, int m, double theta) {
    if (count < 1)
        throw std::invalid_argument("sector_profile: need count >= 1");
    if (m < 0 || m >= count)
        throw std::invalid_argument("sector_profile: m out of range");
    if (count == 1) return 1.0;  // single sector covers the circle
    double aperture = 2.0 * M_PI / count;
    double theta_m = m * aperture;
    double u = std::remainder(theta - theta_m, 2.0 * M_PI) / aperture;
    // 1 for |u| <= 1/4, 0 for |u| >= 3/4; adjacent sectors sum to 1
    return smooth_step((0.75 - std::fabs(u)) / 0.5);
}

double angular_sector_weight(int count, int m, Vec3 xi) {
    if (count < 1)
        throw std::invalid_argument("angular_sector_weight: need count >= 1");
    if (m < 0 || m >= count)
        throw std::invalid_argument("angular_sector_weight: m out of range");
    if (count == 1) return 1.0;  // single sector covers the circle
    if (xi.perp_norm() == 0.0) return 0.0;
    return sector_profile(count, m, std::atan2(xi.y, xi.x));
}

double sector_weight(double lambda, int j, int m, Vec3 xi) {
    return angular_sector_weight(sector_count(lambda, j), m, xi);
}

PieceIndex::PieceIndex(double lambda_, int j_, int m_) : lambda(lambda_), j(j_), m(m_) {
    auto [jmin, jmax] = band_range(lambda);  // also validates lambda >= 2
    if (j < jmin || j > jmax)
        throw std::invalid_argument("PieceIndex: j outside band_range");
    if (!(piece_delta(lambda, j) <= 0.5))
        throw std::invalid_argument("PieceIndex: delta > 0.5 (lambda too small)");
    if (m < 0 || m >= sector_count(lambda, j))
        throw std::invalid_argument("PieceIndex: m outside sector range");
}

double PieceIndex::delta() const { return piece_delta(lambda, j); }

double PieceIndex::alpha() const {
    double d = delta();
    return 1.0 / (1.0 + d * d);
}

int PieceIndex::sectors() const { return sector_count(lambda, j); }

int PieceIndex::bookkeeping_count() const {
    return std::max(1, static_cast<int>(std::lround(1.0 / delta())));
}

double piece_weight(const PieceIndex& p, Vec3 xi) {
    double w = conic_A_weight(xi);
    if (w == 0.0) return 0.0;
    w *= dyadic_weight(p.lambda, xi.z);
    if (w == 0.0) return 0.0;
    w *= band_weight(p.lambda, p.j, xi);
    if (w == 0.0) return 0.0;
    return w * sector_weight(p.lambda, p.j, p.m, xi);
}

std::complex<double> piece_multiplier(const PieceIndex& p, Vec3 xi, double tol) {
    double w = piece_weight(p, xi);
    if (w == 0.0) return {0.0, 0.0};
    return w * multiplier_quadrature(xi, Cutoff{}, tol).value;
}

}  // namespace helixlab
