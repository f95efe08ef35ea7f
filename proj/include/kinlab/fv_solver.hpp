#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kinlab/error.hpp"
#include "kinlab/noise.hpp"
#include "kinlab/problem.hpp"
#include "kinlab/torus_field.hpp"

namespace kinlab {

enum class FluxScheme { local_lax_friedrichs, engquist_osher };

inline std::string to_string(FluxScheme s) {
    return s == FluxScheme::local_lax_friedrichs ? "local_lax_friedrichs" : "engquist_osher";
}

inline FluxScheme flux_scheme_from_string(const std::string& s) {
    if (s == "local_lax_friedrichs" || s == "llf") return FluxScheme::local_lax_friedrichs;
    if (s == "engquist_osher" || s == "eo") return FluxScheme::engquist_osher;
    throw domain_error("unknown flux scheme '" + s + "'");
}

struct SolverConfig {
    std::size_t n_cells = 128;
    double cfl = 0.4;
    double epsilon = 0.0; ///< artificial viscosity
    FluxScheme flux_scheme = FluxScheme::local_lax_friedrichs;
    double t_final = 0.5;
    /// Number of recorded output intervals (power of two); 0 records every step.
    std::size_t n_out = 0;
    /// Lower bound on the number of time steps (power of two).
    std::size_t min_steps = 1;

    void validate() const {
        if (n_cells < 4) throw domain_error("SolverConfig: n_cells must be >= 4");
        if (!(cfl > 0.0 && cfl < 1.0)) throw domain_error("SolverConfig: cfl must lie in (0, 1)");
        if (!(epsilon >= 0.0)) throw domain_error("SolverConfig: epsilon must be nonnegative");
        if (!(t_final > 0.0)) throw domain_error("SolverConfig: t_final must be positive");
        if (n_out != 0 && !std::has_single_bit(n_out)) throw domain_error("SolverConfig: n_out must be a power of two");
        if (min_steps == 0 || !std::has_single_bit(min_steps))
            throw domain_error("SolverConfig: min_steps must be a power of two");
    }
};

struct PathMeta {
    std::uint64_t seed = 0;
    std::size_t n_steps = 0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<TorusField> states;
    SolverConfig config;
    ProblemPtr problem;
    PathMeta path_meta;
    std::string solver = "fv";
    /// Solver steps between consecutive recorded states.
    std::size_t steps_per_record = 1;

    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
    const TorusField& final_state() const { return states.back(); }
};

/// Precomputed per-grid data for one (problem, config) pair. step() is a pure function of its inputs.
class FvStepper {
public:
    FvStepper(const ProblemSpec& spec, const SolverConfig& cfg) : spec_(spec), cfg_(cfg) {
        cfg_.validate();
        const std::size_t n = cfg_.n_cells;
        dx_ = 1.0 / static_cast<double>(n);
        x_face_.resize(n);
        x_center_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            x_face_[i] = static_cast<double>(i + 1) * dx_;
            x_center_[i] = (static_cast<double>(i) + 0.5) * dx_;
        }
        if (cfg_.flux_scheme == FluxScheme::engquist_osher && !spec_.flux_free) build_eo_splitting();
    }

    double dx() const { return dx_; }

    /// Largest dt admissible for every state inside the problem's probe box.
    double max_stable_dt() const {
        double max_fu = 0.0;
        double max_a = 0.0;
        const int probes = 257;
        for (int k = 0; k < probes; ++k) {
            const double u = spec_.u_box.lo + spec_.u_box.width() * k / (probes - 1);
            if (!spec_.flux_free)
                for (std::size_t i = 0; i < x_face_.size(); ++i) {
                    max_fu = std::max(max_fu, std::abs(spec_.flux_u(u, x_face_[i])));
                    max_fu = std::max(max_fu, std::abs(spec_.flux_u(u, x_center_[i])));
                }
            if (!spec_.diffusion_free) max_a = std::max(max_a, spec_.diffusion(u));
        }
        const double rate = max_fu / dx_ + 2.0 * (max_a + cfg_.epsilon) / (dx_ * dx_);
        return rate > 0.0 ? cfg_.cfl / rate : std::numeric_limits<double>::infinity();
    }

    TorusField step(const TorusField& u, double dt, double dW) const {
        const std::size_t n = cfg_.n_cells;
        if (u.n_cells() != n) throw resolution_mismatch("step: field resolution differs from solver config");
        const auto v = u.values();
        std::vector<double> flux(n, 0.0);
        double max_lambda = 0.0;
        if (!spec_.flux_free) {
            for (std::size_t i = 0; i < n; ++i) {
                const double a = v[i];
                const double b = v[(i + 1) % n];
                const double x = x_face_[i];
                const double la = std::abs(spec_.flux_u(a, x));
                const double lb = std::abs(spec_.flux_u(b, x));
                const double lambda = std::max(la, lb);
                max_lambda = std::max(max_lambda, lambda);
                if (cfg_.flux_scheme == FluxScheme::local_lax_friedrichs)
                    flux[i] = 0.5 * (spec_.flux(a, x) + spec_.flux(b, x)) - 0.5 * lambda * (b - a);
                else
                    flux[i] = engquist_osher(a, b, i);
            }
        }
        double max_a = 0.0;
        std::vector<double> B;
        if (!spec_.diffusion_free) {
            B.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                B[i] = kirchhoff_B(spec_, v[i]);
                max_a = std::max(max_a, spec_.diffusion(v[i]));
            }
        }
        const double rate = max_lambda / dx_ + 2.0 * (max_a + cfg_.epsilon) / (dx_ * dx_);
        if (dt * rate > cfg_.cfl * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "CFL violated: dt * rate = " << dt * rate << " > cfl = " << cfg_.cfl;
            throw cfl_violation(msg.str());
        }
        const double r1 = dt / dx_;
        const double r2 = dt / (dx_ * dx_);
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t im = (i + n - 1) % n;
            const std::size_t ip = (i + 1) % n;
            double w = v[i];
            if (!spec_.flux_free) w -= r1 * (flux[i] - flux[im]);
            if (!spec_.diffusion_free) w += r2 * (B[ip] - 2.0 * B[i] + B[im]);
            if (cfg_.epsilon > 0.0) w += cfg_.epsilon * r2 * (v[ip] - 2.0 * v[i] + v[im]);
            if (dW != 0.0) w += spec_.sigma(v[i]) * dW;
            if (!std::isfinite(w)) {
                std::ostringstream msg;
                msg << "non-finite state in cell " << i << " (previous value " << v[i] << ")";
                throw blow_up(msg.str());
            }
            out[i] = w;
        }
        return TorusField(std::move(out));
    }

private:
    enum class Sign { positive, negative, split_increasing, split_decreasing, zero };

    struct Split {
        Sign sign = Sign::zero;
        double sonic = 0.0;
    };

    // P(u) = int_0^u max(F_u, 0) ds, assuming F_u monotone in u on the probe box.
    double positive_part_primitive(double u, std::size_t i) const {
        const double x = x_face_[i];
        const Split& s = split_[i];
        switch (s.sign) {
        case Sign::positive: return spec_.flux(u, x) - spec_.flux(0.0, x);
        case Sign::negative:
        case Sign::zero: return 0.0;
        case Sign::split_increasing:
            return spec_.flux(std::max(u, s.sonic), x) - spec_.flux(std::max(0.0, s.sonic), x);
        case Sign::split_decreasing:
            return spec_.flux(std::min(u, s.sonic), x) - spec_.flux(std::min(0.0, s.sonic), x);
        }
        return 0.0;
    }

    double engquist_osher(double a, double b, std::size_t i) const {
        return spec_.flux(b, x_face_[i]) + positive_part_primitive(a, i) - positive_part_primitive(b, i);
    }

    void build_eo_splitting() {
        split_.resize(x_face_.size());
        const double lo = spec_.u_box.lo;
        const double hi = spec_.u_box.hi;
        for (std::size_t i = 0; i < x_face_.size(); ++i) {
            const double x = x_face_[i];
            const double f_lo = spec_.flux_u(lo, x);
            const double f_hi = spec_.flux_u(hi, x);
            Split& s = split_[i];
            if (f_lo == 0.0 && f_hi == 0.0) {
                s.sign = Sign::zero;
            } else if (f_lo >= 0.0 && f_hi >= 0.0) {
                s.sign = Sign::positive;
            } else if (f_lo <= 0.0 && f_hi <= 0.0) {
                s.sign = Sign::negative;
            } else {
                const bool increasing = f_hi > f_lo;
                double a = lo;
                double b = hi;
                for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
                    const double m = 0.5 * (a + b);
                    const double fm = spec_.flux_u(m, x);
                    if ((fm < 0.0) == increasing) a = m;
                    else b = m;
                }
                s.sign = increasing ? Sign::split_increasing : Sign::split_decreasing;
                s.sonic = 0.5 * (a + b);
            }
        }
    }

    const ProblemSpec& spec_;
    SolverConfig cfg_;
    double dx_ = 0.0;
    std::vector<double> x_face_;
    std::vector<double> x_center_;
    std::vector<Split> split_;
};

/// One explicit step: conservative flux difference, Kirchhoff diffusion,
/// artificial viscosity, then the noise increment sigma(u_i) dW.
inline TorusField step(const TorusField& u, double dt, double dW, const ProblemSpec& spec, const SolverConfig& cfg) {
    SolverConfig c = cfg;
    c.n_cells = u.n_cells();
    return FvStepper(spec, c).step(u, dt, dW);
}

/// Smallest dyadic refinement of `path` whose step satisfies the CFL bound of
/// every given (spec, cfg) pair and cfg.min_steps.
template <class Runs>
NoisePath path_for(const NoisePath& path, const Runs& runs) {
    NoisePath p = path;
    for (const auto& [spec, cfg] : runs) {
        const double dt_max = FvStepper(*spec, *cfg).max_stable_dt();
        while (p.dt() > dt_max || p.n_steps() < cfg->min_steps) p = refine(p);
    }
    return p;
}

inline NoisePath path_for(const NoisePath& path,
                          std::initializer_list<std::pair<const ProblemSpec*, const SolverConfig*>> runs) {
    return path_for<std::initializer_list<std::pair<const ProblemSpec*, const SolverConfig*>>>(path, runs);
}

/// Euler-Maruyama run on exactly the given path grid (no refinement); throws
/// cfl_violation if the grid is too coarse.
inline Trajectory solve_on_grid(const ProblemPtr& spec, const TorusField& u0, const SolverConfig& cfg,
                                const NoisePath& path);

using IncrementObserver = std::function<void(std::size_t step, double dW)>;

namespace detail {

inline Trajectory run_fv(const ProblemPtr& spec, const TorusField& u0, const SolverConfig& cfg, const NoisePath& path,
                         const IncrementObserver& observer) {
    if (u0.n_cells() != cfg.n_cells) throw resolution_mismatch("solve: initial data resolution differs from n_cells");
    if (std::abs(path.t_final() - cfg.t_final) > 1e-12 * cfg.t_final)
        throw domain_error("solve: path horizon differs from t_final");
    FvStepper stepper(*spec, cfg);
    const std::size_t n_steps = path.n_steps();
    if (cfg.n_out > n_steps) throw domain_error("solve: n_out exceeds the number of time steps");
    const std::size_t every = cfg.n_out == 0 ? 1 : n_steps / cfg.n_out;
    const double dt = path.dt();
    const double guard = 0.9 * std::max(std::abs(spec->u_box.lo), std::abs(spec->u_box.hi));

    Trajectory traj;
    traj.config = cfg;
    traj.problem = spec;
    traj.path_meta = {path.seed(), n_steps};
    traj.steps_per_record = every;
    traj.times.push_back(0.0);
    traj.states.push_back(u0);
    TorusField u = u0;
    for (std::size_t j = 0; j < n_steps; ++j) {
        const double dW = path.increment(j);
        if (observer) observer(j, dW);
        u = stepper.step(u, dt, dW);
        if (u.max_abs() > guard) {
            std::ostringstream msg;
            msg << "solution left 0.9 x probe box at t = " << (j + 1) * dt << " (max |u| = " << u.max_abs() << ")";
            throw blow_up(msg.str());
        }
        if ((j + 1) % every == 0) {
            traj.times.push_back(static_cast<double>(j + 1) * dt);
            traj.states.push_back(u);
        }
    }
    return traj;
}

} // namespace detail

inline Trajectory solve_on_grid(const ProblemPtr& spec, const TorusField& u0, const SolverConfig& cfg,
                                const NoisePath& path) {
    cfg.validate();
    return detail::run_fv(spec, u0, cfg, path, {});
}

/// Euler-Maruyama trajectory. The path is refined as needed to satisfy the CFL
/// bound over the probe box; increments are consumed in order.
inline Trajectory solve(const ProblemPtr& spec, const TorusField& u0, const SolverConfig& cfg, const NoisePath& path,
                        const IncrementObserver& observer = {}) {
    cfg.validate();
    const NoisePath p = path_for(path, {{spec.get(), &cfg}});
    return detail::run_fv(spec, u0, cfg, p, observer);
}

inline Trajectory solve(const ProblemSpec& spec, const TorusField& u0, const SolverConfig& cfg, const NoisePath& path) {
    return solve(std::make_shared<const ProblemSpec>(spec), u0, cfg, path);
}

/// Two runs driven by the identical increments.
inline std::pair<Trajectory, Trajectory> coupled_solve(const ProblemPtr& spec_u, const ProblemPtr& spec_v,
                                                       const TorusField& u0, const TorusField& v0,
                                                       const SolverConfig& cfg, const NoisePath& path) {
    cfg.validate();
    require_same_grid(u0, v0);
    const NoisePath p = path_for(path, {{spec_u.get(), &cfg}, {spec_v.get(), &cfg}});
    return {detail::run_fv(spec_u, u0, cfg, p, {}), detail::run_fv(spec_v, v0, cfg, p, {})};
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,cell_index,value\n" << std::setprecision(17);
    for (std::size_t k = 0; k < traj.states.size(); ++k)
        for (std::size_t i = 0; i < traj.states[k].n_cells(); ++i)
            os << traj.times[k] << ',' << i << ',' << traj.states[k][i] << '\n';
}

inline void write_trajectory_meta(std::ostream& os, const Trajectory& traj) {
    os << std::setprecision(17);
    os << "solver=" << traj.solver << '\n';
    if (traj.problem) {
        os << "problem=" << traj.problem->name << '\n';
        os << "noise_model=" << to_string(traj.problem->noise_model) << '\n';
        for (const auto& [k, v] : traj.problem->params) os << "problem." << k << '=' << v << '\n';
    }
    os << "n_cells=" << traj.config.n_cells << '\n';
    os << "cfl=" << traj.config.cfl << '\n';
    os << "epsilon=" << traj.config.epsilon << '\n';
    os << "flux_scheme=" << to_string(traj.config.flux_scheme) << '\n';
    os << "t_final=" << traj.config.t_final << '\n';
    os << "seed=" << traj.path_meta.seed << '\n';
    os << "n_steps=" << traj.path_meta.n_steps << '\n';
    os << "n_records=" << traj.states.size() << '\n';
}

} // namespace kinlab
