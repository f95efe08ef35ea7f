#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "kinlab/error.hpp"

namespace kinlab {

/// Pairwise (cascade) summation over a fixed index tree: the result depends
/// only on the order of the input, never on how the inputs were produced.
inline double pairwise_sum(std::span<const double> x) {
    if (x.empty()) return 0.0;
    if (x.size() <= 8) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

/// Sample mean and standard error (unbiased variance).
inline MeanStderr mean_stderr(std::span<const double> x) {
    MeanStderr out;
    out.n = x.size();
    if (x.empty()) return out;
    out.mean = pairwise_sum(x) / static_cast<double>(x.size());
    if (x.size() < 2) return out;
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - out.mean) * (x[i] - out.mean);
    const double var = pairwise_sum(sq) / static_cast<double>(x.size() - 1);
    out.stderr_ = std::sqrt(var / static_cast<double>(x.size()));
    return out;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double max_residual = 0.0; ///< max (y - fit)
};

/// Ordinary least squares y = intercept + slope x. r^2 is 1 for a perfect fit
/// of constant data.
inline LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw domain_error("linear_fit: need >= 2 matched points");
    const double n = static_cast<double>(xs.size());
    const double mx = pairwise_sum(xs) / n;
    const double my = pairwise_sum(ys) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw domain_error("linear_fit: abscissae are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    f.max_residual = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (f.intercept + f.slope * xs[i]);
        ss_res += r * r;
        f.max_residual = std::max(f.max_residual, r);
    }
    if (syy <= 1e-300) f.r_squared = ss_res <= 1e-300 ? 1.0 : 0.0;
    else f.r_squared = std::max(0.0, 1.0 - ss_res / syy);
    return f;
}

struct RateFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> points; ///< (scale, value)
};

/// Least squares of log value against log scale.
inline RateFit fit_power_law(std::vector<std::pair<double, double>> points) {
    if (points.size() < 3) throw domain_error("fit_power_law: need at least 3 points");
    std::vector<double> lx, ly;
    for (const auto& [s, v] : points) {
        if (!(s > 0.0) || !(v > 0.0)) throw domain_error("fit_power_law: scales and values must be positive");
        lx.push_back(std::log(s));
        ly.push_back(std::log(v));
    }
    const LinearFit f = linear_fit(lx, ly);
    RateFit out;
    out.exponent = f.slope;
    out.prefactor = std::exp(f.intercept);
    out.r_squared = f.r_squared;
    out.points = std::move(points);
    return out;
}

/// A exp(B t) fitted to positive data by least squares in log space, with A
/// raised so that the envelope dominates every point.
struct ExponentialEnvelope {
    double A = 0.0;
    double B = 0.0;
    double r_squared = 0.0;
    double fitted_prefactor = 0.0;
};

inline ExponentialEnvelope fit_exponential_envelope(std::span<const double> t, std::span<const double> values) {
    std::vector<double> ly;
    for (double v : values) {
        if (!(v > 0.0)) throw domain_error("fit_exponential_envelope: values must be positive");
        ly.push_back(std::log(v));
    }
    const LinearFit f = linear_fit(t, ly);
    ExponentialEnvelope e;
    e.B = f.slope;
    e.fitted_prefactor = std::exp(f.intercept);
    e.A = std::exp(f.intercept + std::max(0.0, f.max_residual));
    e.r_squared = f.r_squared;
    return e;
}

} // namespace kinlab
