#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kinlab/error.hpp"

namespace kinlab::quad {

/// Adaptive Gauss-Kronrod (15 point) integral of f over [a, b].
/// Throws quadrature_error if the error estimate stays above 100 tol * max(1, |I|).
/// Tolerances are floored at 1e-12: below that the estimate is rounding noise
/// and bisection only makes it worse.
template <class F>
double adaptive(F&& f, double a, double b, double tol = 1e-12, unsigned max_depth = 15) {
    if (a == b) return 0.0;
    tol = std::max(tol, 1e-12);
    double err = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, tol, &err);
    if (!std::isfinite(value) || err > tol * std::max(1.0, std::abs(value)) * 100.0) {
        std::ostringstream msg;
        msg << "adaptive quadrature did not converge on [" << a << ", " << b << "]: estimate " << value
            << ", error " << err;
        throw quadrature_error(msg.str());
    }
    return value;
}

/// Fixed 10-point Gauss-Legendre rule; exact for polynomials of degree 19.
template <class F>
double gauss10(F&& f, double a, double b) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
}

/// Composite Gauss-Legendre with `panels` equal panels.
template <class F>
double composite_gauss(F&& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) sum += gauss10(f, a + p * h, a + (p + 1) * h);
    return sum;
}

} // namespace kinlab::quad
