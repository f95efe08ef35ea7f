#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <sstream>
#include <vector>

#include "kinlab/error.hpp"
#include "kinlab/fv_solver.hpp"
#include "kinlab/noise.hpp"
#include "kinlab/problem.hpp"
#include "kinlab/spectral.hpp"
#include "kinlab/torus_field.hpp"

namespace kinlab {

struct DuhamelConfig {
    std::size_t n_modes = 128; ///< grid points (cell centers)
    double epsilon = 0.05;
    std::size_t n_time = 512; ///< power of two
    double t_final = 0.05;
    double tol = 1e-8;
    int max_iters = 50;
    double p = 2.0;

    void validate() const {
        if (!(epsilon > 0.0)) throw domain_error("DuhamelConfig: epsilon must be strictly positive");
        if (n_modes < 4 || n_modes % 2 != 0) throw domain_error("DuhamelConfig: n_modes must be even and >= 4");
        if (n_time == 0 || !std::has_single_bit(n_time)) throw domain_error("DuhamelConfig: n_time must be a power of two");
        if (!(t_final > 0.0)) throw domain_error("DuhamelConfig: t_final must be positive");
        if (!(p >= 2.0)) throw domain_error("DuhamelConfig: p must be >= 2");
        if (!(tol > 0.0)) throw domain_error("DuhamelConfig: tol must be positive");
        if (max_iters < 1) throw domain_error("DuhamelConfig: max_iters must be >= 1");
    }
};

/// Fourier multiplier exp(-nu 4 pi^2 k^2 t) applied mode by mode.
inline TorusField heat_propagate(const TorusField& f, double nu, double t) {
    if (!(nu > 0.0)) throw domain_error("heat_propagate: nu must be positive");
    if (!(t >= 0.0)) throw domain_error("heat_propagate: t must be nonnegative");
    if (t == 0.0) return f;
    RealFft fft(f.n_cells());
    std::vector<std::complex<double>> spec;
    fft.forward(f.values(), spec);
    for (std::size_t k = 1; k < spec.size(); ++k) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(k);
        spec[k] *= std::exp(-nu * w * w * t);
    }
    std::vector<double> out;
    fft.inverse(spec, out);
    return TorusField(std::move(out));
}

struct DuhamelResult {
    Trajectory trajectory;
    int iterations = 0;
    std::vector<double> residuals; ///< ||u^n - u^{n-1}|| in L^inf(0,T; L^p)
};

/// Fixed-point iteration of the mild formulation with the eps-heat kernel G:
///
///   u^n(t) = G(t) u0 + int_0^t G(t-s) [ -d_x F(u^{n-1}, x) + d_xx B(u^{n-1}) ] ds
///                    + int_0^t G(t-s) sigma(u^{n-1}) dW(s)
///
/// The deterministic integral uses the exponential integrator on each time
/// cell with the integrand frozen at the left end; the stochastic integral is
/// the left-point (Ito) sum on the path's grid. Starts from u^0(t) = G(t) u0.
inline DuhamelResult picard_solve(const ProblemPtr& spec, const TorusField& u0, const DuhamelConfig& cfg,
                                  const NoisePath& path) {
    using cplx = std::complex<double>;
    cfg.validate();
    if (u0.n_cells() != cfg.n_modes) throw resolution_mismatch("picard_solve: u0 resolution differs from n_modes");
    if (std::abs(path.t_final() - cfg.t_final) > 1e-12 * cfg.t_final)
        throw domain_error("picard_solve: path horizon differs from t_final");

    const std::size_t n = cfg.n_modes;
    const std::size_t nt = cfg.n_time;
    const std::size_t nk = n / 2 + 1;
    const double dt = cfg.t_final / static_cast<double>(nt);
    const double nu = cfg.epsilon;
    const std::vector<double> dW = path.increments_at(nt);

    std::vector<double> decay(nk), phi1(nk), wave(nk);
    for (std::size_t k = 0; k < nk; ++k) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(k);
        wave[k] = (k == n / 2) ? 0.0 : w; // Nyquist mode carries no first derivative
        const double lam = nu * w * w;
        decay[k] = std::exp(-lam * dt);
        phi1[k] = (k == 0) ? dt : -std::expm1(-lam * dt) / lam;
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);

    RealFft fft(n);
    std::vector<cplx> u_hat0;
    fft.forward(u0.values(), u_hat0);

    using Grid = std::vector<std::vector<double>>;
    Grid prev(nt + 1);
    {
        std::vector<cplx> h = u_hat0;
        prev[0].assign(u0.values().begin(), u0.values().end());
        for (std::size_t j = 0; j < nt; ++j) {
            for (std::size_t k = 0; k < nk; ++k) h[k] *= decay[k];
            fft.inverse(h, prev[j + 1]);
        }
    }

    const bool has_flux = !spec->flux_free;
    const bool has_diffusion = !spec->diffusion_free;
    DuhamelResult result;
    Grid next(nt + 1);
    std::vector<double> buf(n);
    std::vector<cplx> f_hat, b_hat, s_hat;
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        std::vector<cplx> h = u_hat0;
        next[0] = prev[0];
        for (std::size_t j = 0; j < nt; ++j) {
            const std::vector<double>& s = prev[j];
            if (has_flux) {
                for (std::size_t i = 0; i < n; ++i) buf[i] = spec->flux(s[i], x[i]);
                fft.forward(buf, f_hat);
            }
            if (has_diffusion) {
                for (std::size_t i = 0; i < n; ++i) buf[i] = kirchhoff_B(*spec, s[i]);
                fft.forward(buf, b_hat);
            }
            for (std::size_t i = 0; i < n; ++i) buf[i] = spec->sigma(s[i]);
            fft.forward(buf, s_hat);
            for (std::size_t k = 0; k < nk; ++k) {
                cplx source{0.0, 0.0};
                if (has_flux) source -= cplx{0.0, wave[k]} * f_hat[k];
                if (has_diffusion) {
                    const double w = 2.0 * std::numbers::pi * static_cast<double>(k);
                    source -= w * w * b_hat[k];
                }
                h[k] = decay[k] * (h[k] + s_hat[k] * dW[j]) + phi1[k] * source;
            }
            fft.inverse(h, next[j + 1]);
            for (double v : next[j + 1])
                if (!std::isfinite(v)) throw blow_up("picard_solve: non-finite iterate");
        }

        double res = 0.0;
        for (std::size_t j = 0; j <= nt; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += std::pow(std::abs(next[j][i] - prev[j][i]), cfg.p);
            res = std::max(res, std::pow(acc / static_cast<double>(n), 1.0 / cfg.p));
        }
        result.residuals.push_back(res);
        std::swap(prev, next);
        result.iterations = iter;
        if (res < cfg.tol) break;
        if (iter > 3) {
            const double ratio = res / result.residuals[result.residuals.size() - 2];
            if (ratio >= 1.0) {
                std::ostringstream msg;
                msg << "Picard iteration is not contracting: residual ratio " << ratio << " at iteration " << iter;
                throw non_contraction(msg.str(), ratio);
            }
        }
        if (iter == cfg.max_iters) {
            std::ostringstream msg;
            msg << "Picard iteration exceeded max_iters = " << cfg.max_iters << " (last residual " << res << ")";
            throw error(msg.str());
        }
    }

    Trajectory& traj = result.trajectory;
    traj.solver = "duhamel";
    traj.problem = spec;
    traj.config.n_cells = n;
    traj.config.epsilon = cfg.epsilon;
    traj.config.t_final = cfg.t_final;
    traj.path_meta = {path.seed(), nt};
    for (std::size_t j = 0; j <= nt; ++j) {
        traj.times.push_back(static_cast<double>(j) * dt);
        traj.states.emplace_back(prev[j]);
    }
    return result;
}

} // namespace kinlab
