#pragma once

#include <chrono>
#include <cmath>
#include <complex>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kinlab/config.hpp"
#include "kinlab/experiments.hpp"
#include "kinlab/fv_solver.hpp"
#include "kinlab/spectral.hpp"

#ifndef KINLAB_VERSION
#define KINLAB_VERSION "0.1.0"
#endif

namespace kinlab {

struct RunRecord {
    std::string config_echo;
    std::string code_version = KINLAB_VERSION;
    std::uint64_t master_seed = 0;
    std::string started_at;
    std::string finished_at;
    std::vector<ClaimResult> verdicts;
};

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Run record without timestamps, so reruns compare byte for byte.
inline void write_run_record(std::ostream& os, const RunRecord& r) {
    os << "code_version = " << r.code_version << "\n";
    os << "master_seed = " << r.master_seed << "\n\n";
    os << r.config_echo << "\n";
    os << "# verdicts: claim_id verdict measured threshold note\n";
    os << std::setprecision(17);
    for (const auto& v : r.verdicts)
        os << v.claim_id << ' ' << to_string(v.verdict) << ' ' << v.measured << ' ' << v.threshold << ' ' << v.note
           << "\n";
}

inline void write_timestamps(std::ostream& os, const RunRecord& r) {
    os << "started_at = " << r.started_at << "\nfinished_at = " << r.finished_at << "\n";
}

inline void write_series_csv(std::ostream& os, const std::vector<SeriesPoint>& pts) {
    os << "t,mean,stderr\n" << std::setprecision(17);
    for (const auto& p : pts) os << p.x << ',' << p.mean << ',' << p.stderr_ << '\n';
}

inline void write_rate_csv(std::ostream& os, const std::vector<SeriesPoint>& pts) {
    os << "scale,value,stderr\n" << std::setprecision(17);
    for (const auto& p : pts) os << p.x << ',' << p.mean << ',' << p.stderr_ << '\n';
}

/// Plot data: natural logs of (scale, value), one row per point.
inline void write_loglog(std::ostream& os, const std::vector<SeriesPoint>& pts) {
    os << "log_scale,log_value\n" << std::setprecision(17);
    for (const auto& p : pts)
        if (p.x > 0.0 && p.mean > 0.0) os << std::log(p.x) << ',' << std::log(p.mean) << '\n';
}

inline void write_kinetic_csv(std::ostream& os, const std::vector<KineticCheck>& checks) {
    os << "check_id,max_abs_error,tolerance,pass\n" << std::setprecision(17);
    for (const auto& c : checks)
        os << c.check_id << ',' << c.max_abs_error << ',' << c.tolerance << ',' << (c.pass ? "true" : "false") << '\n';
}

/// Largest relative deviation of the Fourier amplitudes of `u` from
/// exp(-eps 4 pi^2 k^2 t) |u0_k| over 1 <= k <= n/8, for modes of u0 carrying
/// at least 1e-6 of its largest amplitude.
inline double heat_decay_error(const TorusField& u0, const TorusField& u, double eps, double t) {
    require_same_grid(u0, u);
    RealFft fft(u0.n_cells());
    std::vector<std::complex<double>> a, b;
    fft.forward(u0.values(), a);
    fft.forward(u.values(), b);
    const std::size_t k_max = u0.n_cells() / 8;
    double largest = 0.0;
    for (std::size_t k = 1; k <= k_max; ++k) largest = std::max(largest, std::abs(a[k]));
    double worst = 0.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        if (std::abs(a[k]) < 1e-6 * largest) continue;
        const double kk = static_cast<double>(k);
        const double expected = std::exp(-eps * 4.0 * std::numbers::pi * std::numbers::pi * kk * kk * t);
        worst = std::max(worst, std::abs(std::abs(b[k]) / std::abs(a[k]) - expected) / expected);
    }
    return worst;
}

/// "temporal-bv" -> "temporal_bv"
inline std::string experiment_for_subcommand(std::string sub) {
    for (char& ch : sub)
        if (ch == '-') ch = '_';
    return sub;
}

inline std::filesystem::path output_dir(const std::filesystem::path& root, const std::string& subcommand,
                                        std::uint64_t seed) {
    return root / (subcommand + "_seed" + std::to_string(seed));
}

namespace detail {

template <class Writer>
void write_file(const std::filesystem::path& p, Writer&& w) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw error("cannot write " + p.string());
    w(os);
}

} // namespace detail

struct RunOutcome {
    RunRecord record;
    std::filesystem::path directory;
    int exit_code = 0;
};

/// Executes one experiment and writes its run record, CSVs and plot data into
/// <out_root>/<subcommand>_seed<seed>. Exit code 1 if any verdict is FAIL.
inline RunOutcome run(const std::string& subcommand, const ExperimentConfig& cfg, const std::filesystem::path& out_root,
                      std::ostream& log) {
    RunOutcome out;
    RunRecord& rec = out.record;
    rec.config_echo = cfg.echo;
    rec.master_seed = cfg.ensemble.master_seed;
    rec.started_at = utc_timestamp();
    out.directory = output_dir(out_root, subcommand, rec.master_seed);
    std::filesystem::create_directories(out.directory);
    const auto& dir = out.directory;
    const std::string exp = experiment_for_subcommand(subcommand);
    const EnsembleConfig& e = cfg.ensemble;

    if (exp == "l1_stability") {
        const auto r = run_l1_stability(e);
        detail::write_file(dir / "l1_stability.csv", [&](std::ostream& os) { write_series_csv(os, r.series); });
        rec.verdicts = r.claims;
    } else if (exp == "fractional_bv") {
        const auto r = run_fractional_bv(e);
        detail::write_file(dir / "fractional_bv.csv", [&](std::ostream& os) { write_series_csv(os, r.nikolskii.series); });
        detail::write_file(dir / "bv.csv", [&](std::ostream& os) { write_series_csv(os, r.bv); });
        rec.verdicts = r.nikolskii.claims;
    } else if (exp == "continuous_dependence" || exp == "viscosity_cauchy" || exp == "temporal_bv") {
        const RateReport r = exp == "continuous_dependence" ? run_continuous_dependence(e)
                             : exp == "viscosity_cauchy"    ? run_viscosity_cauchy(e)
                                                            : run_temporal_bv(e);
        detail::write_file(dir / (exp + ".csv"), [&](std::ostream& os) { write_rate_csv(os, r.points); });
        detail::write_file(dir / (exp + "_loglog.csv"), [&](std::ostream& os) { write_loglog(os, r.points); });
        rec.verdicts = r.claims;
        detail::write_file(dir / (exp + "_fit.txt"), [&](std::ostream& os) {
            os << std::setprecision(17) << "exponent = " << r.fit.exponent << "\nexponent_stderr = " << r.exponent_stderr
               << "\nprefactor = " << r.fit.prefactor << "\nr_squared = " << r.fit.r_squared
               << "\ntheory = " << r.theory << "\n";
        });
        log << exp << ": exponent " << r.fit.exponent << " (r^2 " << r.fit.r_squared << ", theory " << r.theory
            << ")\n";
    } else if (exp == "kinetic_checks") {
        const auto checks = run_kinetic_checks(e.master_seed, cfg.kinetic_cases, cfg.kinetic_tolerance, e.workers);
        detail::write_file(dir / "kinetic_checks.csv", [&](std::ostream& os) { write_kinetic_csv(os, checks); });
        for (const auto& c : checks)
            rec.verdicts.push_back({"AC1." + c.check_id, c.pass ? Verdict::pass : Verdict::fail, c.max_abs_error,
                                    c.tolerance, ""});
    } else if (exp == "solve") {
        const ProblemPtr spec = e.problem_spec();
        const TorusField u0 = e.u0();
        const Trajectory tr = solve(spec, u0, e.solver, e.path(0));
        detail::write_file(dir / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, tr); });
        detail::write_file(dir / "trajectory_meta.txt", [&](std::ostream& os) { write_trajectory_meta(os, tr); });
        const bool noiseless = spec->noise_model == NoiseModel::none || spec->params.at("sigma0") == 0.0;
        if (spec->flux_free && spec->diffusion_free && noiseless && e.solver.epsilon > 0.0) {
            const double err = heat_decay_error(u0, tr.final_state(), e.solver.epsilon, tr.times.back());
            rec.verdicts.push_back({"AC3.heat_decay", err <= 0.02 ? Verdict::pass : Verdict::fail, err, 0.02,
                                    "max relative deviation of Fourier amplitudes, k <= n/8"});
        }
    } else {
        throw config_error("unknown subcommand '" + subcommand + "'");
    }

    rec.finished_at = utc_timestamp();
    detail::write_file(dir / "run_record.txt", [&](std::ostream& os) { write_run_record(os, rec); });
    detail::write_file(dir / "timestamps.txt", [&](std::ostream& os) { write_timestamps(os, rec); });
    for (const auto& v : rec.verdicts) {
        log << v.claim_id << ": " << to_string(v.verdict) << " (measured " << v.measured << ", threshold "
            << v.threshold << ")";
        if (!v.note.empty()) log << " " << v.note;
        log << "\n";
        if (v.verdict == Verdict::fail) out.exit_code = 1;
    }
    return out;
}

} // namespace kinlab
