#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "kinlab/bump.hpp"
#include "kinlab/error.hpp"
#include "kinlab/quadrature.hpp"

namespace kinlab {

/// Cell averages of a function on the unit torus [0, 1), cell width 1/n_cells.
/// Indexing through at() is periodic.
class TorusField {
public:
    TorusField() = default;

    explicit TorusField(std::vector<double> values) : values_(std::move(values)) { validate(); }

    static TorusField constant(std::size_t n_cells, double c) {
        return TorusField(std::vector<double>(n_cells, c));
    }

    /// Cell averages of f by 10-point Gauss-Legendre on each cell.
    static TorusField from_function(std::size_t n_cells, const std::function<double(double)>& f) {
        std::vector<double> v(n_cells);
        const double dx = 1.0 / static_cast<double>(n_cells);
        for (std::size_t i = 0; i < n_cells; ++i) {
            const double a = static_cast<double>(i) * dx;
            v[i] = quad::gauss10(f, a, a + dx) / dx;
        }
        return TorusField(std::move(v));
    }

    std::size_t n_cells() const noexcept { return values_.size(); }
    double dx() const noexcept { return 1.0 / static_cast<double>(values_.size()); }
    double center(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * dx(); }

    double operator[](std::size_t i) const noexcept { return values_[i]; }

    double at(long long i) const noexcept {
        const auto n = static_cast<long long>(values_.size());
        long long r = i % n;
        if (r < 0) r += n;
        return values_[static_cast<std::size_t>(r)];
    }

    std::span<const double> values() const noexcept { return values_; }

    double mean() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s / static_cast<double>(values_.size());
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    friend bool operator==(const TorusField&, const TorusField&) = default;

private:
    void validate() const {
        if (values_.empty()) throw domain_error("TorusField needs at least one cell");
        for (double v : values_)
            if (!std::isfinite(v)) throw domain_error("TorusField values must be finite");
    }

    std::vector<double> values_;
};

inline void require_same_grid(const TorusField& u, const TorusField& v) {
    if (u.n_cells() != v.n_cells()) {
        std::ostringstream msg;
        msg << "resolution mismatch: " << u.n_cells() << " vs " << v.n_cells() << " cells";
        throw resolution_mismatch(msg.str());
    }
}

/// a f + b g
inline TorusField axpby(double a, const TorusField& f, double b, const TorusField& g) {
    require_same_grid(f, g);
    std::vector<double> out(f.n_cells());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * f[i] + b * g[i];
    return TorusField(std::move(out));
}

inline double lp_norm(const TorusField& f, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw domain_error("lp_norm: p must be finite and >= 1");
    double s = 0.0;
    for (double v : f.values()) s += std::pow(std::abs(v), p);
    return std::pow(f.dx() * s, 1.0 / p);
}

/// int (v - u)_+ dx
inline double positive_part_l1(const TorusField& u, const TorusField& v) {
    require_same_grid(u, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.n_cells(); ++i) s += std::max(v[i] - u[i], 0.0);
    return u.dx() * s;
}

inline double l1_distance(const TorusField& u, const TorusField& v) {
    require_same_grid(u, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.n_cells(); ++i) s += std::abs(v[i] - u[i]);
    return u.dx() * s;
}

namespace detail {

inline long long grid_steps(const TorusField& f, double h) {
    const double steps = h / f.dx();
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, std::abs(steps)))
        throw domain_error("shift: h must be a multiple of the cell width");
    return static_cast<long long>(rounded);
}

inline TorusField shift_cells(const TorusField& f, long long k) {
    std::vector<double> out(f.n_cells());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.at(static_cast<long long>(i) + k);
    return TorusField(std::move(out));
}

} // namespace detail

/// result(x) = f(x + h) for grid-aligned h.
inline TorusField shift(const TorusField& f, double h) {
    return detail::shift_cells(f, detail::grid_steps(f, h));
}

/// Discrete N^{kappa,1} semi-norm: max over grid shifts h in {dx, ..., h_max} of
/// ||f(. + h) - f||_{L1} / h^kappa.
inline double nikolskii_seminorm(const TorusField& f, double kappa, double h_max) {
    if (!(kappa > 0.0 && kappa <= 1.0)) throw domain_error("nikolskii_seminorm: kappa must lie in (0, 1]");
    const double dx = f.dx();
    if (!(h_max >= dx * (1.0 - 1e-12))) throw domain_error("nikolskii_seminorm: h_max must be at least dx");
    if (h_max > 0.5 + 1e-12) throw domain_error("nikolskii_seminorm: h_max must not exceed 1/2 on the torus");
    const auto n = static_cast<long long>(f.n_cells());
    const long long k_max = std::max<long long>(1, static_cast<long long>(std::floor(h_max / dx + 1e-9)));
    double best = 0.0;
    for (long long k = 1; k <= k_max; ++k) {
        double s = 0.0;
        for (long long i = 0; i < n; ++i) s += std::abs(f.at(i + k) - f.at(i));
        const double h = static_cast<double>(k) * dx;
        best = std::max(best, dx * s / std::pow(h, kappa));
    }
    return best;
}

/// Total variation of the cell sequence, periodic wrap included.
inline double bv_seminorm(const TorusField& f) {
    const auto n = static_cast<long long>(f.n_cells());
    double s = 0.0;
    for (long long i = 0; i < n; ++i) s += std::abs(f.at(i + 1) - f.at(i));
    return s;
}

/// J_theta(x) = J(x / theta) / theta with J the normalised bump on [-1, 1].
class Mollifier {
public:
    explicit Mollifier(double theta) : theta_(theta) {
        if (!(theta > 0.0 && theta <= 0.5)) throw domain_error("Mollifier: theta must lie in (0, 1/2]");
    }

    double theta() const noexcept { return theta_; }

    double operator()(double x) const { return bump_profile::instance()(x / theta_) / theta_; }

private:
    double theta_;
};

/// Cell-average weights of J_theta * (piecewise constant f): weight[m] couples
/// cells a distance m apart, weight[m] = int J_theta(s) hat((s - m dx)/dx) ds.
inline std::vector<double> mollifier_weights(const Mollifier& J, std::size_t n_cells) {
    const double dx = 1.0 / static_cast<double>(n_cells);
    const double theta = J.theta();
    if (theta < 2.0 * dx * (1.0 - 1e-12))
        throw domain_error("mollify: theta must be at least two cell widths");
    const auto reach = static_cast<long long>(std::ceil(theta / dx)) + 1;
    std::vector<double> w(n_cells, 0.0);
    double total = 0.0;
    for (long long m = -reach; m <= reach; ++m) {
        const double lo = std::max(-theta, (static_cast<double>(m) - 1.0) * dx);
        const double hi = std::min(theta, (static_cast<double>(m) + 1.0) * dx);
        if (hi <= lo) continue;
        const double center = static_cast<double>(m) * dx;
        auto integrand = [&](double s) { return J(s) * std::max(0.0, 1.0 - std::abs(s - center) / dx); };
        // hat kink at the center
        double value = 0.0;
        if (center > lo && center < hi)
            value = quad::adaptive(integrand, lo, center, 1e-12) + quad::adaptive(integrand, center, hi, 1e-12);
        else
            value = quad::adaptive(integrand, lo, hi, 1e-12);
        const auto n = static_cast<long long>(n_cells);
        w[static_cast<std::size_t>(((m % n) + n) % n)] += value;
        total += value;
    }
    for (double& x : w) x /= total;
    return w;
}

/// Periodic convolution J_theta * f on cell averages.
inline TorusField mollify(const TorusField& f, const Mollifier& J) {
    const auto w = mollifier_weights(J, f.n_cells());
    const auto n = static_cast<long long>(f.n_cells());
    std::vector<double> out(f.n_cells(), 0.0);
    for (long long i = 0; i < n; ++i) {
        double s = 0.0;
        for (long long m = 0; m < n; ++m) {
            if (w[static_cast<std::size_t>(m)] == 0.0) continue;
            s += w[static_cast<std::size_t>(m)] * f.at(i - m);
        }
        out[static_cast<std::size_t>(i)] = s;
    }
    return TorusField(std::move(out));
}

/// CSV with header "index,value", one row per cell.
inline void write_csv(std::ostream& os, const TorusField& f) {
    os << "index,value\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < f.n_cells(); ++i) os << i << ',' << f[i] << '\n';
}

inline TorusField read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw domain_error("field CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "index,value") throw domain_error("field CSV: header must be 'index,value'");
    std::vector<double> values;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw domain_error("field CSV: expected two columns");
        std::size_t index = 0;
        double value = 0.0;
        try {
            index = std::stoul(line.substr(0, comma));
            value = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw domain_error("field CSV: unparsable row '" + line + "'");
        }
        if (index != row) throw domain_error("field CSV: rows must be indexed 0..n-1 in order");
        values.push_back(value);
        ++row;
    }
    return TorusField(std::move(values));
}

} // namespace kinlab
