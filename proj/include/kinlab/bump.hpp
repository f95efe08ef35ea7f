#pragma once

#include <cmath>
#include <vector>

#include "kinlab/quadrature.hpp"

namespace kinlab {

/// The standard bump exp(1/(r^2 - 1)) on (-1, 1), normalised to unit mass,
/// together with its first two antiderivatives
///
///     cdf(s)  = int_{-1}^{s} bump,       cdf(s) + cdf(-s) = 1
///     cdf2(s) = int_{-1}^{s} cdf,        cdf2(s) - cdf2(-s) = s
///
/// Both antiderivatives are anchored at the origin and tabulated outward on
/// [-1, 0]; positive arguments are mapped through the symmetry relations so the
/// symmetries hold to rounding. Between table nodes the remaining piece is a
/// short 10-point Gauss-Legendre integral of a smooth integrand.
class bump_profile {
public:
    static const bump_profile& instance() {
        static const bump_profile profile;
        return profile;
    }

    static double raw(double r) {
        const double r2 = r * r;
        if (r2 >= 1.0) return 0.0;
        return std::exp(1.0 / (r2 - 1.0));
    }

    double normalization() const { return norm_; }

    double operator()(double r) const { return norm_ * raw(r); }

    /// Derivative of the normalised bump.
    double derivative(double r) const {
        const double r2 = r * r;
        if (r2 >= 1.0) return 0.0;
        const double d = r2 - 1.0;
        return norm_ * raw(r) * (-2.0 * r / (d * d));
    }

    double cdf(double s) const {
        if (s <= -1.0) return 0.0;
        if (s >= 1.0) return 1.0;
        if (s > 0.0) return 1.0 - cdf_neg(-s);
        return cdf_neg(s);
    }

    double cdf2(double s) const {
        if (s <= -1.0) return 0.0;
        if (s >= 1.0) return s;
        if (s > 0.0) return s + cdf2_neg(-s);
        return cdf2_neg(s);
    }

    /// cdf2(0) = int_{-1}^0 cdf.
    double cdf2_at_zero() const { return -first_moment_.back(); }

private:
    static constexpr int table_size = 2048;

    bump_profile() {
        norm_ = 1.0 / quad::adaptive([](double r) { return raw(r); }, -1.0, 1.0, 1e-12);
        // mass_[j]         = int_{s_j}^{0} bump,        s_j = -j / table_size
        // first_moment_[j] = int_{s_j}^{0} tau bump(tau)
        mass_.assign(table_size + 1, 0.0);
        first_moment_.assign(table_size + 1, 0.0);
        const double h = 1.0 / table_size;
        for (int j = 1; j <= table_size; ++j) {
            const double lo = -j * h;
            const double hi = -(j - 1) * h;
            mass_[j] = mass_[j - 1] + quad::gauss10([this](double t) { return (*this)(t); }, lo, hi);
            first_moment_[j] =
                first_moment_[j - 1] + quad::gauss10([this](double t) { return t * (*this)(t); }, lo, hi);
        }
    }

    // s in (-1, 0]
    int node_above(double s) const {
        int j = static_cast<int>(std::floor(-s * table_size));
        if (j < 0) j = 0;
        if (j > table_size) j = table_size;
        return j;
    }

    double mass_from_zero(double s) const {
        const int j = node_above(s);
        const double node = -static_cast<double>(j) / table_size;
        return mass_[j] + quad::gauss10([this](double t) { return (*this)(t); }, s, node);
    }

    double moment_from_zero(double s) const {
        const int j = node_above(s);
        const double node = -static_cast<double>(j) / table_size;
        return first_moment_[j] + quad::gauss10([this](double t) { return t * (*this)(t); }, s, node);
    }

    double cdf_neg(double s) const { return std::max(0.0, 0.5 - mass_from_zero(s)); }

    // cdf2(s) = s cdf(s) - int_{-1}^{s} tau bump = s cdf(s) + T(s) - T(-1), T(s) = int_s^0 tau bump
    double cdf2_neg(double s) const {
        return std::max(0.0, s * cdf_neg(s) + moment_from_zero(s) - first_moment_.back());
    }

    double norm_ = 0.0;
    std::vector<double> mass_;
    std::vector<double> first_moment_;
};

} // namespace kinlab
