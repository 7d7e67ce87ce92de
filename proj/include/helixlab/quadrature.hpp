#pragma once

#include <complex>
#include <functional>

namespace helixlab {

struct PanelResult {
    std::complex<double> value{0.0, 0.0};
    double error_estimate = 0.0;
    int panels = 0;
};

/* Adaptive Gauss-Kronrod 7-15 for oscillatory integrands on [a, b].
 * osc_rate is an upper bound on the phase derivative; the initial panel
 * count is 1 + (b-a)*osc_rate/(2*pi), i.e. about one panel per oscillation,
 * so work grows linearly with the frequency.  Panels are then split worst-
 * first until the summed |K15 - G7| estimate is below tol.  Throws
 * NumericFailure (carrying the achieved estimate) if the panel budget runs
 * out first. */
PanelResult gk_adaptive(const std::function<std::complex<double>(double)>& f,
                        double a, double b, double osc_rate, double tol);

}  // namespace helixlab
