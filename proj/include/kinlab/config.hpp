#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kinlab/error.hpp"
#include "kinlab/experiments.hpp"

namespace kinlab {

/// Fully defaulted, validated run configuration.
struct ExperimentConfig {
    std::string experiment;
    EnsembleConfig ensemble;
    std::size_t kinetic_cases = 1000;
    double kinetic_tolerance = 1e-6;
    /// Canonical text of every effective value; parses back to the same config.
    std::string echo;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"l1_stability",  "fractional_bv",  "continuous_dependence",
                                                "viscosity_cauchy", "temporal_bv", "kinetic_checks", "solve"};
    return names;
}

namespace detail {

struct RawEntry {
    std::string value;
    int line = 0;
};

using RawConfig = std::map<std::string, std::map<std::string, RawEntry>>;

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"problem", {"problem", "eps_c", "nu", "m", "c", "u_box", "kappa_F1", "kappa_F2", "lambda_sigma"}},
        {"solver", {"n_cells", "cfl", "epsilon", "flux_scheme", "t_final", "n_out"}},
        {"noise", {"model", "sigma0", "master_seed", "path_steps"}},
        {"experiment",
         {"experiment", "n_samples", "initial", "amplitude", "offset", "v_offset", "v_shift", "perturbation", "deltas",
          "mu", "eps_ladder", "lags", "confidence", "c_margin", "exponent_factor", "r2_min", "bv_tolerance", "h_max",
          "kinetic_cases", "kinetic_tolerance"}},
    };
    return keys;
}

/// Keys allowed before the first section header, and the section they belong to.
inline const std::map<std::string, std::string>& top_level_keys() {
    static const std::map<std::string, std::string> keys{{"problem", "problem"}, {"experiment", "experiment"}};
    return keys;
}

inline RawConfig read_raw(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw config_error("line " + std::to_string(lineno) + ": malformed section header", lineno);
            section = trim(t.substr(1, t.size() - 2));
            if (!known_keys().count(section))
                throw config_error("line " + std::to_string(lineno) + ": unknown section [" + section + "]", lineno);
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(lineno) + ": expected key=value", lineno);
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        std::string target = section;
        if (target.empty()) {
            auto it = top_level_keys().find(key);
            if (it == top_level_keys().end())
                throw config_error("line " + std::to_string(lineno) + ": key '" + key +
                                       "' must appear inside a section",
                                   lineno);
            target = it->second;
        }
        if (!known_keys().at(target).count(key))
            throw config_error("line " + std::to_string(lineno) + ": unknown key '" + key + "' in [" + target + "]",
                               lineno);
        auto& sec = raw[target];
        if (auto it = sec.find(key); it != sec.end())
            throw config_error("line " + std::to_string(lineno) + ": duplicate key '" + key + "' (first set on line " +
                                   std::to_string(it->second.line) + ")",
                               lineno);
        sec[key] = {value, lineno};
    }
    return raw;
}

/// Typed access with line-numbered errors.
class Reader {
public:
    explicit Reader(RawConfig raw) : raw_(std::move(raw)) {}

    const RawEntry* find(const std::string& section, const std::string& key) const {
        auto s = raw_.find(section);
        if (s == raw_.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    int line(const std::string& section, const std::string& key) const {
        const RawEntry* e = find(section, key);
        return e ? e->line : 0;
    }

    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
        const int l = line(section, key);
        const std::string where = l > 0 ? "line " + std::to_string(l) + ": " : "";
        throw config_error(where + section + "." + key + ": " + what, l);
    }

    std::string required_string(const std::string& section, const std::string& key) const {
        const RawEntry* e = find(section, key);
        if (!e) throw config_error("missing required key '" + key + "' in [" + section + "]", 0);
        return e->value;
    }

    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
        const RawEntry* e = find(section, key);
        return e ? e->value : fallback;
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        const RawEntry* e = find(section, key);
        if (!e) return fallback;
        return parse_double(section, key, e->value);
    }

    std::optional<double> get_optional(const std::string& section, const std::string& key) const {
        const RawEntry* e = find(section, key);
        if (!e) return std::nullopt;
        return parse_double(section, key, e->value);
    }

    std::uint64_t get_uint(const std::string& section, const std::string& key, std::uint64_t fallback) const {
        const RawEntry* e = find(section, key);
        if (!e) return fallback;
        return parse_uint(section, key, e->value);
    }

    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const {
        const RawEntry* e = find(section, key);
        if (!e) return fallback;
        std::vector<double> out;
        for (const auto& item : split(e->value)) out.push_back(parse_double(section, key, item));
        return out;
    }

    std::vector<std::size_t> get_sizes(const std::string& section, const std::string& key,
                                       const std::vector<std::size_t>& fallback) const {
        const RawEntry* e = find(section, key);
        if (!e) return fallback;
        std::vector<std::size_t> out;
        for (const auto& item : split(e->value)) out.push_back(parse_uint(section, key, item));
        return out;
    }

private:
    static std::vector<std::string> split(const std::string& s) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream in(s);
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    double parse_double(const std::string& section, const std::string& key, const std::string& text) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            fail(section, key, "expected a number, got '" + text + "'");
        }
    }

    std::uint64_t parse_uint(const std::string& section, const std::string& key, const std::string& text) const {
        try {
            std::size_t used = 0;
            if (text.empty() || text[0] == '-') throw std::invalid_argument(text);
            const auto v = std::stoull(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            fail(section, key, "expected a nonnegative integer, got '" + text + "'");
        }
    }

    RawConfig raw_;
};

/// Shortest text that parses back to exactly v.
inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
std::string fmt_list(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        if constexpr (std::is_floating_point_v<T>) out += fmt(xs[i]);
        else out += std::to_string(xs[i]);
    }
    return out;
}

/// Parameter keys of each built-in problem and their defaults.
inline const std::map<std::string, std::map<std::string, double>>& problem_param_defaults() {
    static const std::map<std::string, std::map<std::string, double>> d{
        {"het_burgers", {{"eps_c", 0.5}}},
        {"viscous_burgers", {{"nu", 0.0}}},
        {"porous_medium", {{"m", 2.0}}},
        {"linear_advection", {{"c", 1.0}}},
    };
    return d;
}

} // namespace detail

inline std::string canonical_echo(const ExperimentConfig& c) {
    using detail::fmt;
    using detail::fmt_list;
    const EnsembleConfig& e = c.ensemble;
    std::ostringstream os;
    os << "[problem]\n";
    os << "problem = " << e.problem << "\n";
    for (const auto& [k, v] : e.params)
        if (k != "sigma0") os << k << " = " << fmt(v) << "\n";
    if (e.kappa_F1) os << "kappa_F1 = " << fmt(*e.kappa_F1) << "\n";
    if (e.kappa_F2) os << "kappa_F2 = " << fmt(*e.kappa_F2) << "\n";
    if (e.lambda_sigma) os << "lambda_sigma = " << fmt(*e.lambda_sigma) << "\n";
    os << "\n[solver]\n";
    os << "n_cells = " << e.solver.n_cells << "\n";
    os << "cfl = " << fmt(e.solver.cfl) << "\n";
    os << "epsilon = " << fmt(e.solver.epsilon) << "\n";
    os << "flux_scheme = " << to_string(e.solver.flux_scheme) << "\n";
    os << "t_final = " << fmt(e.solver.t_final) << "\n";
    os << "n_out = " << e.solver.n_out << "\n";
    os << "\n[noise]\n";
    os << "model = " << to_string(e.noise) << "\n";
    os << "sigma0 = " << fmt(e.params.count("sigma0") ? e.params.at("sigma0") : 0.0) << "\n";
    os << "master_seed = " << e.master_seed << "\n";
    os << "path_steps = " << e.path_steps << "\n";
    os << "\n[experiment]\n";
    os << "experiment = " << c.experiment << "\n";
    os << "n_samples = " << e.n_samples << "\n";
    os << "initial = " << e.initial << "\n";
    os << "amplitude = " << fmt(e.amplitude) << "\n";
    os << "offset = " << fmt(e.offset) << "\n";
    os << "v_offset = " << fmt(e.v_offset) << "\n";
    os << "v_shift = " << fmt(e.v_shift) << "\n";
    os << "perturbation = " << to_string(e.perturbation) << "\n";
    os << "deltas = " << fmt_list(e.deltas) << "\n";
    os << "mu = " << fmt(e.mu) << "\n";
    os << "eps_ladder = " << fmt_list(e.eps_ladder) << "\n";
    os << "lags = " << fmt_list(e.lags) << "\n";
    os << "confidence = " << fmt(e.confidence) << "\n";
    os << "c_margin = " << fmt(e.c_margin) << "\n";
    os << "exponent_factor = " << fmt(e.exponent_factor) << "\n";
    os << "r2_min = " << fmt(e.r2_min) << "\n";
    os << "bv_tolerance = " << fmt(e.bv_tolerance) << "\n";
    os << "h_max = " << fmt(e.h_max) << "\n";
    os << "kinetic_cases = " << c.kinetic_cases << "\n";
    os << "kinetic_tolerance = " << fmt(c.kinetic_tolerance) << "\n";
    return os.str();
}

/// Parses the [problem]/[solver]/[noise]/[experiment] key=value format. Every
/// error carries the offending line number (0 for a missing key).
inline ExperimentConfig parse_config(const std::string& text) {
    const detail::Reader r(detail::read_raw(text));
    ExperimentConfig c;
    EnsembleConfig& e = c.ensemble;

    e.problem = r.required_string("problem", "problem");
    c.experiment = r.required_string("experiment", "experiment");
    if (std::find(experiment_names().begin(), experiment_names().end(), c.experiment) == experiment_names().end())
        r.fail("experiment", "experiment", "unknown experiment '" + c.experiment + "'");

    const auto& defaults = detail::problem_param_defaults();
    auto pd = defaults.find(e.problem);
    if (pd == defaults.end()) r.fail("problem", "problem", "unknown problem '" + e.problem + "'");
    for (const char* key : {"eps_c", "nu", "m", "c"}) {
        if (r.find("problem", key) && !pd->second.count(key))
            r.fail("problem", key, "does not apply to problem " + e.problem);
    }
    e.params.clear();
    for (const auto& [k, v] : pd->second) e.params[k] = r.get_double("problem", k, v);
    e.params["u_box"] = r.get_double("problem", "u_box", 3.0);
    if (!(e.params["u_box"] > 0.0)) r.fail("problem", "u_box", "must be positive");
    if (e.problem == "het_burgers" && !(std::abs(e.params["eps_c"]) < 1.0)) r.fail("problem", "eps_c", "must satisfy |eps_c| < 1");
    if (e.problem == "viscous_burgers" && !(e.params["nu"] >= 0.0)) r.fail("problem", "nu", "must be nonnegative");
    if (e.problem == "porous_medium" && !(e.params["m"] >= 1.0)) r.fail("problem", "m", "must be >= 1");
    e.kappa_F1 = r.get_optional("problem", "kappa_F1");
    e.kappa_F2 = r.get_optional("problem", "kappa_F2");
    e.lambda_sigma = r.get_optional("problem", "lambda_sigma");
    for (const char* key : {"kappa_F1", "kappa_F2"}) {
        auto v = r.get_optional("problem", key);
        if (v && !(*v > 0.0 && *v <= 1.0)) r.fail("problem", key, "must lie in (0, 1]");
    }
    if (e.lambda_sigma && !(*e.lambda_sigma > 0.5 && *e.lambda_sigma <= 1.0))
        r.fail("problem", "lambda_sigma", "must lie in (1/2, 1]");

    SolverConfig& s = e.solver;
    s.n_cells = r.get_uint("solver", "n_cells", 128);
    if (s.n_cells < 8 || s.n_cells > 4096) r.fail("solver", "n_cells", "must lie in [8, 4096]");
    s.cfl = r.get_double("solver", "cfl", 0.4);
    if (!(s.cfl > 0.0 && s.cfl < 1.0)) r.fail("solver", "cfl", "must lie in (0, 1)");
    s.epsilon = r.get_double("solver", "epsilon", 0.0);
    if (!(s.epsilon >= 0.0)) r.fail("solver", "epsilon", "must be nonnegative");
    try {
        s.flux_scheme = flux_scheme_from_string(r.get_string("solver", "flux_scheme", "local_lax_friedrichs"));
    } catch (const domain_error& ex) {
        r.fail("solver", "flux_scheme", ex.what());
    }
    s.t_final = r.get_double("solver", "t_final", 0.5);
    if (!(s.t_final > 0.0)) r.fail("solver", "t_final", "must be positive");
    s.n_out = r.get_uint("solver", "n_out", 16);
    if (s.n_out != 0 && !std::has_single_bit(s.n_out)) r.fail("solver", "n_out", "must be 0 or a power of two");

    try {
        e.noise = noise_model_from_string(r.get_string("noise", "model", "linear"));
    } catch (const domain_error& ex) {
        r.fail("noise", "model", ex.what());
    }
    e.params["sigma0"] = r.get_double("noise", "sigma0", 0.2);
    e.master_seed = r.get_uint("noise", "master_seed", 20240917);
    e.path_steps = r.get_uint("noise", "path_steps", 64);
    if (e.path_steps == 0 || !std::has_single_bit(e.path_steps)) r.fail("noise", "path_steps", "must be a power of two");
    if (s.n_out > e.path_steps) r.fail("solver", "n_out", "must not exceed noise.path_steps");

    e.n_samples = r.get_uint("experiment", "n_samples", 128);
    if (e.n_samples < 16) r.fail("experiment", "n_samples", "must be >= 16");
    e.initial = r.get_string("experiment", "initial", "sine");
    try {
        (void)initial_field(e.initial, 8, 1.0, 0.0);
    } catch (const domain_error& ex) {
        r.fail("experiment", "initial", ex.what());
    }
    e.amplitude = r.get_double("experiment", "amplitude", 1.0);
    e.offset = r.get_double("experiment", "offset", 0.0);
    e.v_offset = r.get_double("experiment", "v_offset", 0.1);
    e.v_shift = r.get_double("experiment", "v_shift", 0.0);
    {
        const double steps = e.v_shift * static_cast<double>(s.n_cells);
        if (std::abs(steps - std::round(steps)) > 1e-9) r.fail("experiment", "v_shift", "must be a multiple of 1/n_cells");
    }
    try {
        e.perturbation = perturbation_from_string(r.get_string("experiment", "perturbation", "sigma"));
    } catch (const domain_error& ex) {
        r.fail("experiment", "perturbation", ex.what());
    }
    e.deltas = r.get_doubles("experiment", "deltas", e.deltas);
    if (c.experiment == "continuous_dependence") {
        if (e.deltas.size() < 4) r.fail("experiment", "deltas", "need at least 4 values");
        double lo = e.deltas.front(), hi = e.deltas.front();
        for (double d : e.deltas) {
            if (!(d > 0.0)) r.fail("experiment", "deltas", "values must be positive");
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        if (std::log10(hi / lo) < 1.5 - 1e-9) r.fail("experiment", "deltas", "ladder must span at least 1.5 decades");
    }
    e.mu = r.get_double("experiment", "mu", 0.5);
    const double kF1 = e.kappa_F1 ? *e.kappa_F1 : builtin_problem(e.problem, e.params, e.noise).smoothness.kappa_F1;
    if (!(e.mu > 0.0 && e.mu < kF1)) r.fail("experiment", "mu", "mu must lie in (0, kappa_F1) with kappa_F1 = " + detail::fmt(kF1));
    e.eps_ladder = r.get_doubles("experiment", "eps_ladder", e.eps_ladder);
    if (c.experiment == "viscosity_cauchy") {
        if (e.eps_ladder.size() < 4) r.fail("experiment", "eps_ladder", "need at least 4 values");
        for (std::size_t k = 0; k < e.eps_ladder.size(); ++k) {
            if (!(e.eps_ladder[k] > 0.0)) r.fail("experiment", "eps_ladder", "values must be positive");
            if (k > 0 && !(e.eps_ladder[k] < e.eps_ladder[k - 1]))
                r.fail("experiment", "eps_ladder", "values must be strictly decreasing");
        }
    }
    e.lags = r.get_sizes("experiment", "lags", e.lags);
    if (c.experiment == "temporal_bv") {
        if (e.lags.size() < 4) r.fail("experiment", "lags", "need at least 4 lags");
        for (std::size_t lag : e.lags)
            if (lag == 0 || !std::has_single_bit(lag)) r.fail("experiment", "lags", "lags must be powers of two");
    }
    e.confidence = r.get_double("experiment", "confidence", 4.0);
    if (!(e.confidence > 0.0)) r.fail("experiment", "confidence", "must be positive");
    e.c_margin = r.get_double("experiment", "c_margin", 10.0);
    if (!(e.c_margin > 0.0)) r.fail("experiment", "c_margin", "must be positive");
    e.exponent_factor = r.get_double("experiment", "exponent_factor", 0.8);
    if (!(e.exponent_factor > 0.0 && e.exponent_factor <= 1.0)) r.fail("experiment", "exponent_factor", "must lie in (0, 1]");
    e.r2_min = r.get_double("experiment", "r2_min", 0.9);
    if (!(e.r2_min >= 0.0 && e.r2_min <= 1.0)) r.fail("experiment", "r2_min", "must lie in [0, 1]");
    e.bv_tolerance = r.get_double("experiment", "bv_tolerance", 1e-8);
    if (!(e.bv_tolerance >= 0.0)) r.fail("experiment", "bv_tolerance", "must be nonnegative");
    e.h_max = r.get_double("experiment", "h_max", 0.25);
    if (!(e.h_max > 0.0 && e.h_max <= 0.5)) r.fail("experiment", "h_max", "must lie in (0, 1/2]");
    c.kinetic_cases = r.get_uint("experiment", "kinetic_cases", 1000);
    if (c.kinetic_cases == 0) r.fail("experiment", "kinetic_cases", "must be positive");
    c.kinetic_tolerance = r.get_double("experiment", "kinetic_tolerance", 1e-6);
    if (!(c.kinetic_tolerance > 0.0)) r.fail("experiment", "kinetic_tolerance", "must be positive");

    c.echo = canonical_echo(c);
    return c;
}

} // namespace kinlab
