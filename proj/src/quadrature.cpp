#include "helixlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

#include "helixlab/errors.hpp"

namespace helixlab {

namespace {

/* Kronrod-15 abscissae (positive half) and weights; the odd-index nodes are
 * the embedded Gauss-7 rule. */
const double XK[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
const double WK[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
const double WG[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

struct Panel {
    double a, b;
    std::complex<double> value;
    double err;
};

Panel eval_panel(const std::function<std::complex<double>(double)>& f,
                 double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::complex<double> k15{0.0, 0.0}, g7{0.0, 0.0};
    std::complex<double> fc = f(c);
    k15 += WK[7] * fc;
    g7 += WG[3] * fc;
    for (int i = 0; i < 7; ++i) {
        std::complex<double> lo = f(c - h * XK[i]);
        std::complex<double> hi = f(c + h * XK[i]);
        k15 += WK[i] * (lo + hi);
        if (i % 2 == 1) g7 += WG[i / 2] * (lo + hi);
    }
    k15 *= h;
    g7 *= h;
    return {a, b, k15, std::abs(k15 - g7)};
}

struct WorstFirst {
    bool operator()(const Panel& p, const Panel& q) const {
        if (p.err != q.err) return p.err < q.err;
        return p.a > q.a;  // deterministic tie-break
    }
};

}  // namespace

PanelResult gk_adaptive(const std::function<std::complex<double>(double)>& f,
                        double a, double b, double osc_rate, double tol) {
    if (!(b > a)) throw std::invalid_argument("gk_adaptive: need b > a");
    if (!(tol > 0.0)) throw std::invalid_argument("gk_adaptive: need tol > 0");

    long init = 1 + static_cast<long>((b - a) * std::max(osc_rate, 0.0) / (2.0 * M_PI));
    init = std::min(init, 4000000L);
    /* Seeding is ~1 panel per oscillation period; the 15-point rule needs
     * about 4 panels per period to certify 1e-12-level tolerances, so leave
     * room for two global doublings plus fixed headroom for local trouble. */
    long budget = 4 * init + 2048;

    std::priority_queue<Panel, std::vector<Panel>, WorstFirst> heap;
    std::complex<double> total{0.0, 0.0};
    double total_err = 0.0;
    for (long i = 0; i < init; ++i) {
        double pa = a + (b - a) * static_cast<double>(i) / static_cast<double>(init);
        double pb = a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(init);
        Panel p = eval_panel(f, pa, pb);
        total += p.value;
        total_err += p.err;
        heap.push(p);
    }

    long used = init;
    while (total_err > tol && used < budget) {
        Panel worst = heap.top();
        heap.pop();
        total -= worst.value;
        total_err -= worst.err;
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // interval at rounding limit
            total += worst.value;
            total_err += worst.err;
            break;
        }
        Panel left = eval_panel(f, worst.a, mid);
        Panel right = eval_panel(f, mid, worst.b);
        total += left.value + right.value;
        total_err += left.err + right.err;
        heap.push(left);
        heap.push(right);
        ++used;
    }

    if (total_err > tol)
        throw NumericFailure("gk_adaptive: panel budget exhausted", total_err);
    return {total, total_err, static_cast<int>(std::min<long>(used, 1L << 30))};
}

}  // namespace helixlab
