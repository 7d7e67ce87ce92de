#include "helixlab/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "helixlab/errors.hpp"
#include "helixlab/quadrature.hpp"

namespace helixlab {

RegionSet classify_region(Vec3 xi) {
    if (xi.norm() == 0.0)
        throw std::invalid_argument("classify_region: xi must be nonzero");
    double perp = xi.perp_norm();
    double ax3 = std::fabs(xi.z);
    RegionSet set;
    set.elliptic = perp <= 0.99 * ax3;
    set.oscillatory = perp >= 1.01 * ax3;
    set.conic_a = (perp >= 0.98 * ax3) && (perp <= 1.02 * ax3);
    set.transition = !(set.elliptic || set.oscillatory || set.conic_a);
    return set;
}

double phase(Vec3 xi, double t) {
    return -(xi.x * std::cos(t) + xi.y * std::sin(t) + xi.z * t);
}

double phase_derivative(Vec3 xi, double t, int k) {
    if (k == 1) return xi.x * std::sin(t) - xi.y * std::cos(t) - xi.z;
    if (k == 2) return xi.x * std::cos(t) + xi.y * std::sin(t);
    throw std::invalid_argument("phase_derivative: k must be 1 or 2");
}

std::vector<double> critical_points(Vec3 xi, double a, double b) {
    if (!(b > a)) throw std::invalid_argument("critical_points: need b > a");
    if (xi.norm() == 0.0)
        throw std::invalid_argument("critical_points: xi must be nonzero");
    // psi'(t) = |xi'| sin(t - angle) - xi3: no roots when |xi'| < |xi3|
    if (xi.perp_norm() < std::fabs(xi.z)) return {};

    const double res_tol = 1e-12 * std::max(1.0, xi.norm());
    const int cells = 256;
    std::vector<double> roots;

    auto fp = [&](double t) { return phase_derivative(xi, t, 1); };
    auto fpp = [&](double t) { return phase_derivative(xi, t, 2); };

    auto refine = [&](double lo, double hi, double flo, double fhi) {
        double t = 0.5 * (lo + hi);
        for (int it = 0; it < 80; ++it) {
            double ft = fp(t);
            if (std::fabs(ft) <= res_tol) return t;
            if ((flo < 0.0) == (ft < 0.0)) {
                lo = t;
                flo = ft;
            } else {
                hi = t;
                fhi = ft;
            }
            double d = fpp(t);
            double tn = (d != 0.0) ? t - ft / d : t;
            if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);  // Newton left bracket
            t = tn;
        }
        std::ostringstream msg;
        msg << "critical_points: refinement stalled on bracket [" << lo << ", "
            << hi << "], f = [" << flo << ", " << fhi << "]";
        throw NumericFailure(msg.str(), std::fabs(fp(t)));
    };

    double prev_t = a, prev_f = fp(a);
    if (std::fabs(prev_f) <= res_tol) roots.push_back(a);
    for (int i = 1; i <= cells; ++i) {
        double t = a + (b - a) * static_cast<double>(i) / cells;
        double f = fp(t);
        if (std::fabs(f) <= res_tol) {
            roots.push_back(t);
        } else if ((prev_f < 0.0) != (f < 0.0) && std::fabs(prev_f) > res_tol) {
            roots.push_back(refine(prev_t, t, prev_f, f));
        }
        prev_t = t;
        prev_f = f;
    }

    std::sort(roots.begin(), roots.end());
    // merge duplicates from roots landing on grid nodes
    std::vector<double> out;
    for (double r : roots)
        if (out.empty() || r - out.back() > 1e-9 * (b - a)) out.push_back(r);
    return out;
}

MultiplierValue multiplier_quadrature(Vec3 xi, const Cutoff& cut, double tol) {
    if (!(tol > 0.0))
        throw std::invalid_argument("multiplier_quadrature: need tol > 0");
    double osc = std::fabs(xi.x) + std::fabs(xi.y) + std::fabs(xi.z);
    auto integrand = [&](double t) {
        double w = cutoff_value(cut, t);
        if (w == 0.0) return std::complex<double>{0.0, 0.0};
        double p = phase(xi, t);
        return std::complex<double>{w * std::cos(p), w * std::sin(p)};
    };
    PanelResult r = gk_adaptive(integrand, cut.center - cut.halfwidth,
                                cut.center + cut.halfwidth, osc, tol);
    return {r.value, r.error_estimate, r.panels};
}

std::complex<double> multiplier_stationary_phase(Vec3 xi, const Cutoff& cut) {
    double perp = xi.perp_norm();
    if (!(perp >= 1.01 * std::fabs(xi.z)))
        throw std::invalid_argument(
            "multiplier_stationary_phase: need |xi'| >= 1.01 |xi3|");

    /* psi'(t) = R sin(t - ang) - xi3 with R = |xi'|; roots are
     * ang + asin(s) + 2 pi k and ang + pi - asin(s) + 2 pi k, s = xi3/R. */
    double ang = std::atan2(xi.y, xi.x);
    double s = xi.z / perp;
    double base0 = ang + std::asin(s);
    double base1 = ang + M_PI - std::asin(s);
    double a = cut.center - cut.halfwidth, b = cut.center + cut.halfwidth;

    std::vector<double> tcs;
    for (double base : {base0, base1})
        for (int k = -3; k <= 3; ++k) {
            double t = base + 2.0 * M_PI * k;
            if (t > a && t < b) tcs.push_back(t);
        }
    std::sort(tcs.begin(), tcs.end());

    std::complex<double> sum{0.0, 0.0};
    for (double tc : tcs) {
        double w = cutoff_value(cut, tc);
        if (w == 0.0) continue;
        double dd = phase_derivative(xi, tc, 2);
        if (std::fabs(dd) < 1e-6 * xi.norm())
            throw DegeneratePhase("multiplier_stationary_phase: |psi''| too small",
                                  std::fabs(dd));
        double amp = w * std::sqrt(2.0 * M_PI / std::fabs(dd));
        double ph = phase(xi, tc) + (dd > 0.0 ? M_PI / 4.0 : -M_PI / 4.0);
        sum += std::complex<double>{amp * std::cos(ph), amp * std::sin(ph)};
    }
    return sum;
}

ExponentFit decay_fit(Vec3 direction, const std::vector<double>& radii,
                      const Cutoff& cut, double tol) {
    if (direction.norm() == 0.0)
        throw std::invalid_argument("decay_fit: direction must be nonzero");
    if (radii.size() < 5)
        throw std::invalid_argument("decay_fit: need at least 5 radii");
    for (size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] >= 10.0))
            throw std::invalid_argument("decay_fit: radii must be >= 10");
        if (i > 0 && !(radii[i] > radii[i - 1]))
            throw std::invalid_argument("decay_fit: radii must be increasing");
    }
    Vec3 u = (1.0 / direction.norm()) * direction;
    std::vector<double> mags;
    mags.reserve(radii.size());
    for (double r : radii)
        mags.push_back(std::abs(multiplier_quadrature(r * u, cut, tol).value));
    return fit_exponent(radii, mags);
}

}  // namespace helixlab
