#pragma once

#include <vector>

namespace helixlab {

/* Result of a log-log least-squares fit y ~ C * x^slope.
 * max_residual is the largest |log y_i - (intercept + slope*log x_i)|. */
struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;  // log C (natural log)
    double max_residual = 0.0;
    int n_points = 0;
};

/* Least squares on (log x, log y).  Requires at least 4 samples, strictly
 * increasing positive x, and positive y. */
ExponentFit fit_exponent(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace helixlab
