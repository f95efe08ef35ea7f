#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "kinlab/bump.hpp"
#include "kinlab/error.hpp"
#include "kinlab/fv_solver.hpp"
#include "kinlab/noise.hpp"
#include "kinlab/problem.hpp"
#include "kinlab/quadrature.hpp"
#include "kinlab/torus_field.hpp"

namespace kinlab {

/// H(s) with H(0) = 1/2.
inline double heaviside(double s) {
    if (s > 0.0) return 1.0;
    if (s < 0.0) return 0.0;
    return 0.5;
}

/// Convex regularisation of (.)_+ on the scale rho:
///   eta''(r) = bump(r / rho) / rho,  eta' = int eta'',  eta = int eta'.
/// eta coincides with (r)_+ for |r| >= rho and 1 - eta'(r) = eta'(-r).
class EtaFamily {
public:
    explicit EtaFamily(double rho) : rho_(rho), profile_(&bump_profile::instance()) {
        if (!(rho > 0.0)) throw domain_error("EtaFamily: rho must be positive");
    }

    double rho() const noexcept { return rho_; }

    double eta(double r) const {
        if (r >= rho_) return r;
        if (r <= -rho_) return 0.0;
        return rho_ * profile_->cdf2(r / rho_);
    }

    double eta_prime(double r) const { return profile_->cdf(r / rho_); }

    double eta_double_prime(double r) const { return (*profile_)(r / rho_) / rho_; }

private:
    double rho_;
    const bump_profile* profile_;
};

inline EtaFamily build_eta(double rho) { return EtaFamily(rho); }

struct IdentityPair {
    double lhs = 0.0;
    double rhs = 0.0;
    double error() const { return std::abs(lhs - rhs); }
};

/// lhs = int int H(xi - u) (1 - H(zeta - v)) eta''(zeta - xi) dzeta dxi over xi_box^2,
/// rhs = eta(v - u).
///
/// The double integral is taken in (s = zeta - xi, xi) coordinates: s runs
/// over the band [-rho, rho] where eta'' lives, and for fixed s the xi-measure
/// of {xi > u, xi + s < v} inside the box is exact. The s-integral is composite
/// Gauss-Legendre split at the kink s = v - u; the bump is flat to all orders at
/// the band edges, where adaptive error estimates stall.
inline IdentityPair doubling_identity_check(double u, double v, const EtaFamily& eta, Interval xi_box) {
    const double rho = eta.rho();
    if (xi_box.lo > std::min(u, v) - 2.0 * rho || xi_box.hi < std::max(u, v) + 2.0 * rho)
        throw domain_error("doubling_identity_check: xi_box must contain [min(u,v) - 2 rho, max(u,v) + 2 rho]");
    auto inner = [&](double s) {
        // xi in [u, v - s] and zeta = xi + s in the box
        const double lo = std::max({u, xi_box.lo, xi_box.lo - s});
        const double hi = std::min({v - s, xi_box.hi, xi_box.hi - s});
        return std::max(0.0, hi - lo);
    };
    auto integrand = [&](double s) { return eta.eta_double_prime(s) * inner(s); };
    const double kink = v - u;
    constexpr int panels = 64;
    double lhs = 0.0;
    if (kink > -rho && kink < rho)
        lhs = quad::composite_gauss(integrand, -rho, kink, panels) + quad::composite_gauss(integrand, kink, rho, panels);
    else
        lhs = quad::composite_gauss(integrand, -rho, rho, panels);
    return {lhs, eta.eta(v - u)};
}

/// int_{lo}^{hi} H(xi - u) (1 - H(xi - v)) dxi, by sweeping the breakpoints of
/// the piecewise-constant integrand.
inline double kinetic_overlap(double u, double v, double lo, double hi) {
    std::array<double, 4> pts{lo, hi, std::clamp(u, lo, hi), std::clamp(v, lo, hi)};
    std::sort(pts.begin(), pts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double a = pts[k];
        const double b = pts[k + 1];
        if (b <= a) continue;
        const double mid = 0.5 * (a + b);
        total += (b - a) * heaviside(mid - u) * (1.0 - heaviside(mid - v));
    }
    return total;
}

/// (Delta x sum_x int H(xi - u)(1 - H(xi - v)) dxi,  int (v - u)_+ dx)
inline IdentityPair positive_part_identity(const TorusField& u, const TorusField& v, Interval xi_box) {
    require_same_grid(u, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.n_cells(); ++i) {
        if (!xi_box.contains(u[i]) || !xi_box.contains(v[i]))
            throw domain_error("positive_part_identity: xi_box must cover both field ranges");
        s += kinetic_overlap(u[i], v[i], xi_box.lo, xi_box.hi);
    }
    return {u.dx() * s, positive_part_l1(u, v)};
}

/// chi(xi_k, x_i) = H(xi_k - u_i) on a fixed xi grid.
struct KineticSample {
    std::vector<double> xi_grid;
    std::vector<std::vector<double>> chi; ///< chi[i][k]
};

inline KineticSample kinetic_sample(const TorusField& u, std::vector<double> xi_grid) {
    if (!std::is_sorted(xi_grid.begin(), xi_grid.end())) throw domain_error("kinetic_sample: xi grid must be increasing");
    KineticSample out;
    out.chi.resize(u.n_cells());
    for (std::size_t i = 0; i < u.n_cells(); ++i) {
        out.chi[i].resize(xi_grid.size());
        for (std::size_t k = 0; k < xi_grid.size(); ++k) out.chi[i][k] = heaviside(xi_grid[k] - u[i]);
    }
    out.xi_grid = std::move(xi_grid);
    return out;
}

/// Smooth test function phi(xi, x) for the kinetic weak form. phi must vanish
/// for xi >= xi_upper; phi_xi may be supported anywhere below it.
struct TestFunction {
    using Fn = std::function<double(double, double)>;
    Fn phi;
    Fn phi_xi;
    Fn phi_x;
    Fn phi_xx;
    double xi_upper = 0.0;
    bool x_independent = false;
    /// Optional closed form of int_u^{xi_upper} phi(xi, x) dxi.
    Fn primitive_above;
};

/// phi(xi) = 1 - cdf((2 xi - a - b) / (b - a)): equal to 1 below a, 0 above b,
/// nonincreasing in between. Optionally multiplied by g(x) = 1 + amp cos(2 pi x).
inline TestFunction smooth_step_test(double a, double b, double amp = 0.0) {
    if (!(b > a)) throw domain_error("smooth_step_test: need a < b");
    if (std::abs(amp) >= 1.0) throw domain_error("smooth_step_test: |amp| must be < 1 to keep phi >= 0");
    const bump_profile* prof = &bump_profile::instance();
    const double w = b - a;
    const double c = 0.5 * (a + b);
    auto s_of = [c, w](double xi) { return 2.0 * (xi - c) / w; };
    const double k = 2.0 * std::numbers::pi;
    auto g = [amp, k](double x) { return 1.0 + amp * std::cos(k * x); };
    auto gx = [amp, k](double x) { return -amp * k * std::sin(k * x); };
    auto gxx = [amp, k](double x) { return -amp * k * k * std::cos(k * x); };
    TestFunction t;
    t.phi = [=](double xi, double x) { return (1.0 - prof->cdf(s_of(xi))) * g(x); };
    t.phi_xi = [=](double xi, double x) { return -(*prof)(s_of(xi)) * (2.0 / w) * g(x); };
    t.phi_x = [=](double xi, double x) { return (1.0 - prof->cdf(s_of(xi))) * gx(x); };
    t.phi_xx = [=](double xi, double x) { return (1.0 - prof->cdf(s_of(xi))) * gxx(x); };
    t.xi_upper = b;
    t.x_independent = (amp == 0.0);
    t.primitive_above = [=](double u, double x) {
        const double s = std::min(s_of(u), 1.0);
        return 0.5 * w * (prof->cdf2(s) - s) * g(x);
    };
    return t;
}

namespace detail {

inline double integrate_above(const std::function<double(double)>& g, double u, double upper) {
    if (u >= upper) return 0.0;
    const int panels = std::max(2, static_cast<int>(std::ceil((upper - u) / 0.25)));
    return quad::composite_gauss(g, u, upper, panels);
}

inline double primitive_above(const TestFunction& t, double u, double x) {
    if (u >= t.xi_upper) return 0.0;
    if (t.primitive_above) return t.primitive_above(u, x);
    return integrate_above([&](double xi) { return t.phi(xi, x); }, u, t.xi_upper);
}

inline void require_records(const Trajectory& traj) {
    if (traj.states.size() < 2) throw domain_error("trajectory needs at least two recorded states");
    if (!traj.problem) throw domain_error("trajectory carries no problem");
}

} // namespace detail

using PhaseTest = std::function<double(double, double)>;

/// Delta t Delta x sum_{t,i} |D_x B_half(u)|_i^2 phi(u_i, x_i), centered differences,
/// left-point sum over the recorded times.
inline double parabolic_defect(const Trajectory& traj, const PhaseTest& phi) {
    detail::require_records(traj);
    const ProblemSpec& spec = *traj.problem;
    if (spec.diffusion_free) return 0.0;
    const double dt = traj.dt();
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < traj.states.size(); ++j) {
        const TorusField& u = traj.states[j];
        const auto n = static_cast<long long>(u.n_cells());
        const double dx = u.dx();
        std::vector<double> bh(u.n_cells());
        for (std::size_t i = 0; i < u.n_cells(); ++i) bh[i] = kirchhoff(spec, u[i]).second;
        double s = 0.0;
        for (long long i = 0; i < n; ++i) {
            const double d = (bh[static_cast<std::size_t>((i + 1) % n)] - bh[static_cast<std::size_t>((i + n - 1) % n)]) / (2.0 * dx);
            s += d * d * phi(u[static_cast<std::size_t>(i)], u.center(static_cast<std::size_t>(i)));
        }
        total += dt * dx * s;
    }
    return total;
}

/// (1/2) Delta t Delta x sum_{t,i} sigma(u_i)^2 phi(u_i, x_i), left-point sum.
inline double ito_correction(const Trajectory& traj, const PhaseTest& phi) {
    detail::require_records(traj);
    const ProblemSpec& spec = *traj.problem;
    const double dt = traj.dt();
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < traj.states.size(); ++j) {
        const TorusField& u = traj.states[j];
        double s = 0.0;
        for (std::size_t i = 0; i < u.n_cells(); ++i) {
            const double sg = spec.sigma(u[i]);
            s += sg * sg * phi(u[i], u.center(i));
        }
        total += 0.5 * dt * u.dx() * s;
    }
    return total;
}

struct WeakFormTerms {
    double time_boundary = 0.0; ///< int H(xi-u_T) phi - int H(xi-u_0) phi
    double transport = 0.0;     ///< -int int int H (F_u phi_x - D_xF phi_xi + (a + eps) phi_xx)
    double parabolic = 0.0;     ///< n(phi_xi)
    double ito = 0.0;           ///< p(phi_xi)
    double stochastic = 0.0;    ///< sum sigma(u) phi(u, x) dx dW
    double residual = 0.0;      ///< -m(phi_xi)
};

/// Evaluates every term of the kinetic weak formulation on the trajectory and
/// solves for the kinetic-defect slot. For a time-independent phi the identity
/// satisfied by a solution of  du + d_x F dt = d_xx B dt + eps u_xx dt + sigma dW  is
///
///   int H(xi-u_T) phi - int H(xi-u_0) phi
///     - int_0^T int int H(xi-u) [F_u phi_x - D_xF phi_xi + (a(xi) + eps) phi_xx]
///   = (m + n - p)(phi_xi) - int_0^T int sigma(u) phi(u, x) dx dW,
///
/// with the artificial viscosity's dissipation eps |u_x|^2 delta(xi - u)
/// counted in m. Returns -m(phi_xi), which is >= 0 for phi_xi <= 0 up to scheme error.
inline WeakFormTerms weak_form_terms(const Trajectory& traj, const std::vector<double>& dW, const TestFunction& test) {
    detail::require_records(traj);
    if (!test.phi || !test.phi_xi || !test.phi_x || !test.phi_xx)
        throw domain_error("weak_form_residual: test function must provide phi, phi_xi, phi_x and phi_xx");
    if (!std::isfinite(test.xi_upper)) throw domain_error("weak_form_residual: phi must vanish above a finite xi_upper");
    for (double x : {0.0, 0.25, 0.5, 0.75})
        if (std::abs(test.phi(test.xi_upper, x)) > 1e-12 || std::abs(test.phi(test.xi_upper + 1.0, x)) > 1e-12)
            throw domain_error("weak_form_residual: phi is not compactly supported below xi_upper");
    if (dW.size() + 1 != traj.states.size())
        throw domain_error("weak_form_residual: trajectory must record every step of the path grid");

    const ProblemSpec& spec = *traj.problem;
    const double eps = traj.config.epsilon;
    const double dt = traj.dt();
    const TorusField& u0 = traj.states.front();
    const TorusField& uT = traj.states.back();
    const double dx = u0.dx();
    const bool need_transport = !(test.x_independent && spec.translation_invariant);

    WeakFormTerms t;
    for (std::size_t i = 0; i < u0.n_cells(); ++i)
        t.time_boundary += dx * (detail::primitive_above(test, uT[i], u0.center(i)) -
                                 detail::primitive_above(test, u0[i], u0.center(i)));

    for (std::size_t j = 0; j + 1 < traj.states.size(); ++j) {
        const TorusField& u = traj.states[j];
        double transport = 0.0;
        double stoch = 0.0;
        for (std::size_t i = 0; i < u.n_cells(); ++i) {
            const double x = u.center(i);
            if (need_transport) {
                auto g = [&](double xi) {
                    double v = 0.0;
                    if (!test.x_independent) {
                        v += spec.flux_u(xi, x) * test.phi_x(xi, x);
                        v += (spec.diffusion(xi) + eps) * test.phi_xx(xi, x);
                    }
                    v -= spec.flux_x(xi, x) * test.phi_xi(xi, x);
                    return v;
                };
                transport += detail::integrate_above(g, u[i], test.xi_upper);
            }
            if (dW[j] != 0.0) stoch += spec.sigma(u[i]) * test.phi(u[i], x);
        }
        t.transport -= dt * dx * transport;
        t.stochastic += dx * stoch * dW[j];
    }
    t.parabolic = -parabolic_defect(traj, [&](double xi, double x) { return -test.phi_xi(xi, x); });
    t.ito = -ito_correction(traj, [&](double xi, double x) { return -test.phi_xi(xi, x); });
    const double lhs = t.time_boundary + t.transport;
    t.residual = -lhs + t.parabolic - t.ito - t.stochastic;
    return t;
}

inline double weak_form_residual(const Trajectory& traj, const NoisePath& path, const TestFunction& test) {
    if (path.seed() != traj.path_meta.seed) throw domain_error("weak_form_residual: path seed differs from the trajectory's");
    if (traj.steps_per_record != 1)
        throw domain_error("weak_form_residual: trajectory must record every step of the path grid");
    return weak_form_terms(traj, path.increments_at(traj.path_meta.n_steps), test).residual;
}

/// Noise-free variant: the trajectory's problem must have sigma == 0 on its states.
inline double weak_form_residual(const Trajectory& traj, const TestFunction& test) {
    detail::require_records(traj);
    for (const auto& s : traj.states)
        for (double v : s.values())
            if (traj.problem->sigma(v) != 0.0)
                throw domain_error("weak_form_residual: stochastic trajectory needs its noise path");
    if (traj.steps_per_record != 1)
        throw domain_error("weak_form_residual: trajectory must record every step");
    return weak_form_terms(traj, std::vector<double>(traj.states.size() - 1, 0.0), test).residual;
}

struct DefectEstimate {
    double n_mass = 0.0;     ///< parabolic defect total mass
    double p_mass = 0.0;     ///< Ito correction total mass
    double m_residual = 0.0; ///< -m(phi_xi)
};

inline DefectEstimate defect_estimate(const Trajectory& traj, const NoisePath& path, const TestFunction& test) {
    auto one = [](double, double) { return 1.0; };
    return {parabolic_defect(traj, one), ito_correction(traj, one), weak_form_residual(traj, path, test)};
}

} // namespace kinlab
