#include "helixlab/curves.hpp"

#include <cmath>
#include <stdexcept>

#include "helixlab/decomposition.hpp"  // smooth_step

namespace helixlab {

Curve helix() { return {CurveKind::Helix, -M_PI, M_PI}; }
Curve twisted_cubic() { return {CurveKind::TwistedCubic, -3.0, 3.0}; }

Vec3 curve_eval(const Curve& c, double t, int order) {
    if (order < 0 || order > 3)
        throw std::invalid_argument("curve_eval: derivative order must be in 0..3");
    if (t < c.t_min || t > c.t_max)
        throw std::invalid_argument("curve_eval: t outside parameter interval");
    if (c.kind == CurveKind::Helix) {
        switch (order) {
            case 0: return {std::cos(t), std::sin(t), t};
            case 1: return {-std::sin(t), std::cos(t), 1.0};
            case 2: return {-std::cos(t), -std::sin(t), 0.0};
            default: return {std::sin(t), -std::cos(t), 0.0};
        }
    }
    switch (order) {
        case 0: return {t, t * t, t * t * t};
        case 1: return {1.0, 2.0 * t, 3.0 * t * t};
        case 2: return {0.0, 2.0, 6.0 * t};
        default: return {0.0, 0.0, 6.0};
    }
}

double torsion_det(const Curve& c, double t) {
    return triple(curve_eval(c, t, 1), curve_eval(c, t, 2), curve_eval(c, t, 3));
}

/* ---- reference quadrature: classic adaptive Simpson ---- */

namespace {

double simpson(double (*f)(double, const void*), const void* ctx,
               double a, double m, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(double (*f)(double, const void*), const void* ctx,
             double a, double m, double b, double fa, double fm, double fb,
             double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm, ctx), frm = f(rm, ctx);
    double left = simpson(f, ctx, a, lm, m, fa, flm, fm);
    double right = simpson(f, ctx, m, rm, b, fm, frm, fb);
    double err = left + right - whole;
    if (depth <= 0 || std::fabs(err) <= 15.0 * tol)
        return left + right + err / 15.0;
    return adapt(f, ctx, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adapt(f, ctx, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double reference_integral(double (*f)(double, const void*), const void* ctx,
                          double a, double b, double tol) {
    double m = 0.5 * (a + b);
    double fa = f(a, ctx), fm = f(m, ctx), fb = f(b, ctx);
    double whole = simpson(f, ctx, a, m, b, fa, fm, fb);
    return adapt(f, ctx, a, m, b, fa, fm, fb, whole, tol, 48);
}

/* ---- cutoff bump ---- */

namespace {

double unit_bump(double u) {
    // exp(-1/(1-u^2)) on (-1,1), extended by 0
    double s = 1.0 - u * u;
    if (s <= 0.0) return 0.0;
    return std::exp(-1.0 / s);
}

double unit_bump_adapter(double u, const void*) { return unit_bump(u); }

// integral of exp(-1/(1-u^2)) over (-1,1); computed once
double unit_bump_mass() {
    static const double mass =
        reference_integral(unit_bump_adapter, nullptr, -1.0, 1.0);
    return mass;
}

}  // namespace

double cutoff_value(const Cutoff& c, double t) {
    if (!(c.halfwidth > 0.0))
        throw std::invalid_argument("cutoff_value: halfwidth must be positive");
    double u = (t - c.center) / c.halfwidth;
    return unit_bump(u) / (c.halfwidth * unit_bump_mass());
}

double trimmed_cutoff_value(const Cutoff& c, double delta, double t) {
    if (!(delta > 0.0) || !(20.0 * delta < c.halfwidth))
        throw std::invalid_argument(
            "trimmed_cutoff_value: need 0 < 20*delta < halfwidth");
    double ramp = smooth_step((std::fabs(t) / delta - 10.0) / 10.0);
    return cutoff_value(c, t) * ramp;
}

}  // namespace helixlab
