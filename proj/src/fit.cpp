#include "helixlab/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace helixlab {

ExponentFit fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("fit_exponent: size mismatch");
    if (x.size() < 4)
        throw std::invalid_argument("fit_exponent: need at least 4 samples");
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("fit_exponent: samples must be positive");
        if (i > 0 && !(x[i] > x[i - 1]))
            throw std::invalid_argument("fit_exponent: x must be strictly increasing");
    }

    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i) {
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }

    ExponentFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.n_points = n;
    for (int i = 0; i < n; ++i) {
        double r = std::fabs(std::log(y[i]) - (fit.intercept + fit.slope * std::log(x[i])));
        fit.max_residual = std::max(fit.max_residual, r);
    }
    return fit;
}

}  // namespace helixlab
