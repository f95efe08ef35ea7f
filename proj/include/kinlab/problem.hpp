#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <utility>

#include "kinlab/error.hpp"
#include "kinlab/quadrature.hpp"

namespace kinlab {

struct Interval {
    double lo = -3.0;
    double hi = 3.0;
    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Declared Hoelder exponents of the coefficient data.
struct Smoothness {
    double kappa_F1 = 1.0;     ///< F_u Hoelder in u
    double kappa_F2 = 1.0;     ///< D_x F Hoelder in x
    double lambda_sigma = 1.0; ///< sigma Hoelder in u
    double gamma_alpha = 1.0;  ///< alpha = sqrt(a) Hoelder in u
};

/// Declared growth orders and constants, used by the Hoelder property checks:
///   |F_u(u,x) - F_u(v,x)|   <= C_F1 (|u|^{p-1} + |v|^{p-1} + 1) |u - v|^kappa_F1
///   |D_xF(u,x) - D_xF(u,y)| <= C_F2 (|u|^q + 1) |x - y|^kappa_F2
///   |sigma(u) - sigma(v)|   <= C_sigma |u - v|^lambda_sigma
///   a(u)                    <= C_a (|u|^a_order + 1)
struct GrowthBounds {
    double p = 1.0;
    double q = 0.0;
    double C_F1 = 1.0;
    double C_F2 = 1.0;
    double C_sigma = 1.0;
    double C_a = 1.0;
    double a_order = 0.0;
};

enum class NoiseModel { none, constant, linear, sqrt_one_plus };

inline std::string to_string(NoiseModel m) {
    switch (m) {
    case NoiseModel::none: return "none";
    case NoiseModel::constant: return "constant";
    case NoiseModel::linear: return "linear";
    case NoiseModel::sqrt_one_plus: return "sqrt";
    }
    return "none";
}

inline NoiseModel noise_model_from_string(const std::string& s) {
    if (s == "none") return NoiseModel::none;
    if (s == "constant") return NoiseModel::constant;
    if (s == "linear") return NoiseModel::linear;
    if (s == "sqrt") return NoiseModel::sqrt_one_plus;
    throw domain_error("unknown noise model '" + s + "' (expected none, constant, linear or sqrt)");
}

/// Coefficient data of  du + d_x F(u,x) dt = d_xx B(u) dt + sigma(u) dW  on the unit torus.
/// Immutable after construction; share it through ProblemPtr.
struct ProblemSpec {
    using Fn2 = std::function<double(double, double)>;
    using Fn1 = std::function<double(double)>;

    std::string name;
    std::map<std::string, double> params;
    NoiseModel noise_model = NoiseModel::none;

    Fn2 flux;      ///< F(u, x)
    Fn2 flux_u;    ///< F_u(u, x)
    Fn2 flux_x;    ///< D_x F(u, x), partial in x at fixed u
    Fn1 diffusion; ///< a(u) >= 0
    Fn1 sqrt_diffusion;
    Fn1 kirchhoff;      ///< B(u) = int_0^u a; empty -> quadrature
    Fn1 kirchhoff_half; ///< int_0^u sqrt(a); empty -> quadrature
    Fn1 sigma;

    bool flux_free = false;      ///< F identically zero
    bool diffusion_free = false; ///< a identically zero
    bool translation_invariant = false; ///< D_x F identically zero

    Smoothness smoothness;
    GrowthBounds growth;
    Interval u_box;
};

using ProblemPtr = std::shared_ptr<const ProblemSpec>;

using ProblemParams = std::map<std::string, double>;

namespace detail {

inline double param(const ProblemParams& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

inline void install_noise(ProblemSpec& s, NoiseModel model, double sigma0) {
    s.noise_model = model;
    s.params["sigma0"] = sigma0;
    switch (model) {
    case NoiseModel::none: s.sigma = [](double) { return 0.0; }; break;
    case NoiseModel::constant: s.sigma = [sigma0](double) { return sigma0; }; break;
    case NoiseModel::linear: s.sigma = [sigma0](double u) { return sigma0 * u; }; break;
    case NoiseModel::sqrt_one_plus: s.sigma = [sigma0](double u) { return sigma0 * std::sqrt(1.0 + u * u); }; break;
    }
    s.smoothness.lambda_sigma = 1.0;
    s.growth.C_sigma = std::max(std::abs(sigma0), 1e-300);
}

inline void no_diffusion(ProblemSpec& s) {
    s.diffusion = [](double) { return 0.0; };
    s.sqrt_diffusion = [](double) { return 0.0; };
    s.kirchhoff = [](double) { return 0.0; };
    s.kirchhoff_half = [](double) { return 0.0; };
    s.diffusion_free = true;
    s.growth.C_a = 0.0;
}

inline void constant_diffusion(ProblemSpec& s, double nu) {
    if (nu < 0.0) throw domain_error("diffusion coefficient must be nonnegative");
    if (nu == 0.0) {
        no_diffusion(s);
        return;
    }
    const double r = std::sqrt(nu);
    s.diffusion = [nu](double) { return nu; };
    s.sqrt_diffusion = [r](double) { return r; };
    s.kirchhoff = [nu](double u) { return nu * u; };
    s.kirchhoff_half = [r](double u) { return r * u; };
    s.growth.C_a = nu;
}

} // namespace detail

/// Built-in problems:
///   het_burgers       F = c(x) u^2/2, c(x) = 1 + eps_c sin(2 pi x)          params eps_c
///   viscous_burgers   F = u^2/2, a = nu                                      params nu
///   porous_medium     F = 0, a = m |u|^{m-1}                                 params m
///   linear_advection  F = c u, a = 0                                         params c
/// Every problem accepts sigma0 (default 0) and u_box (half width, default 3).
inline ProblemSpec builtin_problem(const std::string& name, const ProblemParams& params = {},
                                   NoiseModel noise = NoiseModel::linear) {
    using std::numbers::pi;
    ProblemSpec s;
    s.name = name;
    const double sigma0 = detail::param(params, "sigma0", 0.0);
    const double half_box = detail::param(params, "u_box", 3.0);
    if (!(half_box > 0.0)) throw domain_error("u_box must be positive");
    s.u_box = Interval{-half_box, half_box};
    s.params["u_box"] = half_box;

    if (name == "het_burgers") {
        const double eps_c = detail::param(params, "eps_c", 0.5);
        if (std::abs(eps_c) >= 1.0) throw domain_error("het_burgers: |eps_c| must be < 1 so that c(x) > 0");
        s.params["eps_c"] = eps_c;
        s.flux = [eps_c](double u, double x) { return (1.0 + eps_c * std::sin(2 * pi * x)) * 0.5 * u * u; };
        s.flux_u = [eps_c](double u, double x) { return (1.0 + eps_c * std::sin(2 * pi * x)) * u; };
        s.flux_x = [eps_c](double u, double x) { return eps_c * 2 * pi * std::cos(2 * pi * x) * 0.5 * u * u; };
        detail::no_diffusion(s);
        s.translation_invariant = (eps_c == 0.0);
        s.smoothness = {1.0, 1.0, 1.0, 1.0};
        s.growth.p = 1.0;
        s.growth.C_F1 = 1.0 + std::abs(eps_c);
        s.growth.q = 2.0;
        s.growth.C_F2 = 2.0 * pi * pi * std::abs(eps_c);
    } else if (name == "viscous_burgers") {
        const double nu = detail::param(params, "nu", 0.0);
        s.params["nu"] = nu;
        s.flux = [](double u, double) { return 0.5 * u * u; };
        s.flux_u = [](double u, double) { return u; };
        s.flux_x = [](double, double) { return 0.0; };
        detail::constant_diffusion(s, nu);
        s.translation_invariant = true;
        s.smoothness = {1.0, 1.0, 1.0, 1.0};
        s.growth.p = 1.0;
        s.growth.C_F1 = 1.0;
        s.growth.C_F2 = 0.0;
    } else if (name == "porous_medium") {
        const double m = detail::param(params, "m", 2.0);
        if (!(m >= 1.0)) throw domain_error("porous_medium: m must be >= 1");
        s.params["m"] = m;
        s.flux = [](double, double) { return 0.0; };
        s.flux_u = [](double, double) { return 0.0; };
        s.flux_x = [](double, double) { return 0.0; };
        s.flux_free = true;
        s.translation_invariant = true;
        s.diffusion = [m](double u) { return m * std::pow(std::abs(u), m - 1.0); };
        s.sqrt_diffusion = [m](double u) { return std::sqrt(m * std::pow(std::abs(u), m - 1.0)); };
        s.kirchhoff = [m](double u) { return std::copysign(std::pow(std::abs(u), m), u); };
        const double e = 0.5 * (m + 1.0);
        s.kirchhoff_half = [m, e](double u) { return std::copysign(std::sqrt(m) * std::pow(std::abs(u), e) / e, u); };
        s.smoothness = {1.0, 1.0, 1.0, std::min(1.0, 0.5 * (m - 1.0))};
        if (m == 1.0) s.smoothness.gamma_alpha = 1.0;
        s.growth.C_F1 = 0.0;
        s.growth.C_F2 = 0.0;
        s.growth.C_a = m;
        s.growth.a_order = m - 1.0;
    } else if (name == "linear_advection") {
        const double c = detail::param(params, "c", 1.0);
        s.params["c"] = c;
        s.flux = [c](double u, double) { return c * u; };
        s.flux_u = [c](double, double) { return c; };
        s.flux_x = [](double, double) { return 0.0; };
        s.flux_free = (c == 0.0);
        s.translation_invariant = true;
        detail::no_diffusion(s);
        s.smoothness = {1.0, 1.0, 1.0, 1.0};
        s.growth.C_F1 = 0.0;
        s.growth.C_F2 = 0.0;
    } else {
        throw domain_error("unknown problem '" + name +
                           "' (expected het_burgers, porous_medium, linear_advection or viscous_burgers)");
    }
    detail::install_noise(s, noise, sigma0);
    return s;
}

/// (B(u), B_half(u)) = (int_0^u a, int_0^u sqrt(a)); closed forms when the
/// spec carries them, adaptive quadrature otherwise.
inline std::pair<double, double> kirchhoff(const ProblemSpec& spec, double u) {
    const double B = spec.kirchhoff ? spec.kirchhoff(u) : quad::adaptive(spec.diffusion, 0.0, u, 1e-11);
    const double Bh = spec.kirchhoff_half ? spec.kirchhoff_half(u) : quad::adaptive(spec.sqrt_diffusion, 0.0, u, 1e-11);
    return {B, Bh};
}

inline double kirchhoff_B(const ProblemSpec& spec, double u) {
    return spec.kirchhoff ? spec.kirchhoff(u) : quad::adaptive(spec.diffusion, 0.0, u, 1e-11);
}

/// One-parameter perturbations used by the continuous dependence experiments.
namespace perturb {

/// tau = sigma + delta
inline ProblemSpec sigma_shift(ProblemSpec s, double delta) {
    auto base = s.sigma;
    s.sigma = [base, delta](double u) { return base(u) + delta; };
    s.name += "+sigma_shift";
    s.params["delta_sigma"] = delta;
    return s;
}

/// a -> a + extra (extra >= 0). Also models the artificial viscosity epsilon.
inline ProblemSpec add_viscosity(ProblemSpec s, double extra) {
    if (extra < 0.0) throw domain_error("add_viscosity: extra viscosity must be nonnegative");
    if (extra == 0.0) return s;
    auto a = s.diffusion;
    auto B = s.kirchhoff;
    s.diffusion = [a, extra](double u) { return a(u) + extra; };
    s.sqrt_diffusion = [a, extra](double u) { return std::sqrt(a(u) + extra); };
    if (B)
        s.kirchhoff = [B, extra](double u) { return B(u) + extra * u; };
    if (s.diffusion_free) {
        const double r = std::sqrt(extra);
        s.kirchhoff_half = [r](double u) { return r * u; };
    } else {
        s.kirchhoff_half = nullptr;
    }
    s.diffusion_free = false;
    s.name += "+viscosity";
    s.params["delta_viscosity"] = extra;
    return s;
}

/// G = F + delta u, so G_u - F_u = delta.
inline ProblemSpec flux_u_shift(ProblemSpec s, double delta) {
    auto F = s.flux;
    auto Fu = s.flux_u;
    s.flux = [F, delta](double u, double x) { return F(u, x) + delta * u; };
    s.flux_u = [Fu, delta](double u, double x) { return Fu(u, x) + delta; };
    s.flux_free = false;
    s.name += "+flux_u_shift";
    s.params["delta_flux_u"] = delta;
    return s;
}

/// G = F + delta sin(2 pi x) / (2 pi), so G_u = F_u and D_x(G - F) = delta cos(2 pi x).
inline ProblemSpec div_flux_source(ProblemSpec s, double delta) {
    using std::numbers::pi;
    auto F = s.flux;
    auto Fx = s.flux_x;
    s.flux = [F, delta](double u, double x) { return F(u, x) + delta * std::sin(2 * pi * x) / (2 * pi); };
    s.flux_x = [Fx, delta](double u, double x) { return Fx(u, x) + delta * std::cos(2 * pi * x); };
    s.flux_free = false;
    s.translation_invariant = false;
    s.name += "+div_flux_source";
    s.params["delta_div_flux"] = delta;
    return s;
}

} // namespace perturb

struct CoefficientDistance {
    double d_flux_u = 0.0;    ///< sup |G_u - F_u|
    double d_div_flux = 0.0;  ///< sup |D_x (G - F)|
    double d_sqrt_diff = 0.0; ///< sup |beta - alpha|
    double d_sigma = 0.0;     ///< sup |tau - sigma|
    Interval probe_box;
};

/// Suprema over an n_probe x n_probe grid of u_box x [0, 1).
inline CoefficientDistance coefficient_distance(const ProblemSpec& p, const ProblemSpec& q, Interval u_box,
                                                int n_probe = 512) {
    if (n_probe < 64) throw domain_error("coefficient_distance: n_probe must be >= 64");
    CoefficientDistance d;
    d.probe_box = u_box;
    for (int i = 0; i < n_probe; ++i) {
        const double u = u_box.lo + u_box.width() * i / (n_probe - 1);
        d.d_sqrt_diff = std::max(d.d_sqrt_diff, std::abs(q.sqrt_diffusion(u) - p.sqrt_diffusion(u)));
        d.d_sigma = std::max(d.d_sigma, std::abs(q.sigma(u) - p.sigma(u)));
        for (int j = 0; j < n_probe; ++j) {
            const double x = static_cast<double>(j) / n_probe;
            d.d_flux_u = std::max(d.d_flux_u, std::abs(q.flux_u(u, x) - p.flux_u(u, x)));
            d.d_div_flux = std::max(d.d_div_flux, std::abs(q.flux_x(u, x) - p.flux_x(u, x)));
        }
    }
    return d;
}

/// sup over the box of |D_x F_u|, by centered differences in x of F_u.
inline double sup_div_flux_u(const ProblemSpec& s, Interval u_box, int n_probe = 256) {
    double best = 0.0;
    const double h = 1e-6;
    for (int i = 0; i < n_probe; ++i) {
        const double u = u_box.lo + u_box.width() * i / (n_probe - 1);
        for (int j = 0; j < n_probe; ++j) {
            const double x = static_cast<double>(j) / n_probe;
            best = std::max(best, std::abs(s.flux_u(u, x + h) - s.flux_u(u, x - h)) / (2 * h));
        }
    }
    return best;
}

} // namespace kinlab
