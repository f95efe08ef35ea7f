#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kinlab/config.hpp"
#include "kinlab/duhamel_solver.hpp"
#include "kinlab/report.hpp"

using namespace kinlab;
namespace fs = std::filesystem;

namespace {

int config_error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const config_error& e) {
        return e.line();
    }
    return -1;
}

std::string message_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const config_error& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("kinlab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(KINLAB_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, MinimalConfigFillsDefaults) {
    const auto c = parse_config("problem = het_burgers\nexperiment = l1_stability\n");
    EXPECT_EQ(c.experiment, "l1_stability");
    EXPECT_EQ(c.ensemble.problem, "het_burgers");
    EXPECT_EQ(c.ensemble.solver.n_cells, 128u);
    EXPECT_EQ(c.ensemble.n_samples, 128u);
    EXPECT_EQ(c.ensemble.master_seed, 20240917u);
    EXPECT_EQ(c.ensemble.params.at("eps_c"), 0.5);
    for (const char* key : {"n_cells", "cfl", "epsilon", "flux_scheme", "t_final", "n_out", "model", "sigma0",
                            "master_seed", "path_steps", "n_samples", "deltas", "mu", "eps_ladder", "lags",
                            "confidence", "eps_c", "u_box"})
        EXPECT_NE(c.echo.find(std::string(key) + " = "), std::string::npos) << key;
}

TEST(Config, SectionsAndComments) {
    const auto c = parse_config(
        "# comment\n[problem]\nproblem = viscous_burgers\nnu = 0.01\n\n[solver]\nn_cells = 64\n"
        "flux_scheme = eo\n; another\n[noise]\nmodel = constant\nsigma0 = 0.3\n[experiment]\n"
        "experiment = temporal_bv\nlags = 1, 2, 4, 8\n");
    EXPECT_EQ(c.ensemble.params.at("nu"), 0.01);
    EXPECT_EQ(c.ensemble.solver.flux_scheme, FluxScheme::engquist_osher);
    EXPECT_EQ(c.ensemble.noise, NoiseModel::constant);
    EXPECT_EQ(c.ensemble.lags, (std::vector<std::size_t>{1, 2, 4, 8}));
}

TEST(Config, MuOutsideRangeIsRejected) {
    const std::string text = "problem = het_burgers\nexperiment = continuous_dependence\n[experiment]\nmu = 1.5\n";
    EXPECT_NE(message_of(text).find("mu must lie in (0, kappa_F1)"), std::string::npos);
    EXPECT_EQ(config_error_line(text), 4);
}

TEST(Config, DuplicateKeyReportsBothLines) {
    const std::string text = "problem = het_burgers\nexperiment = l1_stability\n[solver]\nn_cells = 64\ncfl = 0.3\nn_cells = 32\n";
    const std::string msg = message_of(text);
    EXPECT_NE(msg.find("4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("6"), std::string::npos) << msg;
    EXPECT_NE(msg.find("n_cells"), std::string::npos) << msg;
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_EQ(config_error_line("problem = het_burgers\nexperiment = l1_stability\n[bogus]\n"), 3);
    EXPECT_EQ(config_error_line("problem = het_burgers\nexperiment = l1_stability\n[solver]\ncolour = red\n"), 4);
    EXPECT_EQ(config_error_line("problem = het_burgers\nexperiment = l1_stability\n[solver]\ncfl = 1.5\n"), 4);
    EXPECT_EQ(config_error_line("problem = het_burgers\nexperiment = l1_stability\n[solver]\nn_cells = many\n"), 4);
    EXPECT_EQ(config_error_line("problem = het_burgers\nexperiment = l1_stability\n[problem]\nnu = 0.1\n"), 4);
    EXPECT_EQ(config_error_line("experiment = l1_stability\n"), 0);
    EXPECT_NE(message_of("experiment = l1_stability\n").find("missing required key"), std::string::npos);
    EXPECT_EQ(config_error_line("problem = het_burgers\nexperiment = continuous_dependence\n[experiment]\ndeltas =\n"), 4);
    EXPECT_EQ(config_error_line("problem = het_burgers\nexperiment = temporal_bv\n[experiment]\nlags = 1, 3, 4, 8\n"), 4);
}

TEST(Config, EchoRoundTrips) {
    const auto a = parse_config(
        "problem = porous_medium\nexperiment = fractional_bv\n[problem]\nm = 3\n[noise]\nsigma0 = 0.125\n"
        "[experiment]\ndeltas = 0.001, 0.01, 0.1, 1\nv_offset = 0.3\n");
    const auto b = parse_config(a.echo);
    EXPECT_EQ(a.echo, b.echo);
    EXPECT_EQ(b.ensemble.params, a.ensemble.params);
    EXPECT_EQ(b.ensemble.deltas, a.ensemble.deltas);
}

TEST(Report, RunWritesRecordAndCsv) {
    const fs::path out = scratch("report");
    auto cfg = parse_config("problem = het_burgers\nexperiment = kinetic_checks\n[experiment]\nkinetic_cases = 100\n");
    std::ostringstream log;
    const auto r = run("kinetic-checks", cfg, out, log);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.directory, out / "kinetic-checks_seed20240917");
    const std::string csv = slurp(r.directory / "kinetic_checks.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "check_id,max_abs_error,tolerance,pass");
    const std::string rec = slurp(r.directory / "run_record.txt");
    EXPECT_NE(rec.find("AC1.doubling_identity PASS"), std::string::npos);
    EXPECT_NE(rec.find("master_seed = 20240917"), std::string::npos);
    EXPECT_NE(slurp(r.directory / "timestamps.txt").find("started_at"), std::string::npos);
    EXPECT_NE(log.str().find("PASS"), std::string::npos);
}

TEST(Report, RerunsAreByteIdentical) {
    const std::string text =
        "problem = het_burgers\nexperiment = l1_stability\n[solver]\nn_cells = 32\nt_final = 0.1\nn_out = 4\n"
        "[noise]\npath_steps = 4\n[experiment]\nn_samples = 16\n";
    auto cfg = parse_config(text);
    std::ostringstream log;
    cfg.ensemble.workers = 1;
    const auto a = run("l1-stability", cfg, scratch("rerun_a"), log);
    cfg.ensemble.workers = 3;
    const auto b = run("l1-stability", cfg, scratch("rerun_b"), log);
    for (const char* f : {"l1_stability.csv", "run_record.txt"})
        EXPECT_EQ(slurp(a.directory / f), slurp(b.directory / f)) << f;
}

TEST(Report, SolveHeatCaseMatchesDecayLaw) {
    auto cfg = parse_config(
        "problem = linear_advection\nexperiment = solve\n[problem]\nc = 0\n[solver]\nepsilon = 0.01\n"
        "t_final = 0.002\nn_out = 1\n[noise]\nmodel = none\npath_steps = 64\n[experiment]\ninitial = step\n");
    std::ostringstream log;
    const auto r = run("solve", cfg, scratch("solve"), log);
    ASSERT_EQ(r.record.verdicts.size(), 1u);
    EXPECT_EQ(r.record.verdicts[0].claim_id, "AC3.heat_decay");
    EXPECT_EQ(r.record.verdicts[0].verdict, Verdict::pass) << r.record.verdicts[0].measured;
    const std::string csv = slurp(r.directory / "trajectory.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,cell_index,value");
}

TEST(Report, HeatDecayErrorExamples) {
    const auto u0 = TorusField::from_function(64, [](double x) { return std::sin(2 * std::numbers::pi * x); });
    EXPECT_NEAR(heat_decay_error(u0, heat_propagate(u0, 0.1, 0.05), 0.1, 0.05), 0.0, 1e-12);
    EXPECT_NEAR(heat_decay_error(u0, u0, 0.1, 0.05), std::expm1(0.1 * 4 * std::numbers::pi * std::numbers::pi * 0.05),
                1e-12);
}

TEST(Cli, KineticChecksExitZero) {
    const fs::path out = scratch("cli_kinetic");
    EXPECT_EQ(run_cli("kinetic-checks -o " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "kinetic-checks_seed20240917" / "kinetic_checks.csv"));
}

TEST(Cli, ZeroSizeDeltaLadderIsConfigError) {
    const fs::path out = scratch("cli_deltas");
    const fs::path cfg = out / "bad.cfg";
    std::ofstream(cfg) << "problem = het_burgers\nexperiment = continuous_dependence\n[experiment]\ndeltas =\n";
    EXPECT_EQ(run_cli("continuous-dependence -c " + cfg.string() + " -o " + out.string()), 2);
    std::ofstream(cfg) << "problem = het_burgers\nexperiment = continuous_dependence\n[experiment]\ndeltas = 0, 0, 0, 0\n";
    EXPECT_EQ(run_cli("continuous-dependence -c " + cfg.string() + " -o " + out.string()), 2);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run_cli("no-such-command"), 2);
    const fs::path out = scratch("cli_mismatch");
    const fs::path cfg = out / "c.cfg";
    std::ofstream(cfg) << "problem = het_burgers\nexperiment = temporal_bv\n";
    EXPECT_EQ(run_cli("l1-stability -c " + cfg.string() + " -o " + out.string()), 2);
}

TEST(Cli, SolveHeatCase) {
    const fs::path out = scratch("cli_solve");
    const fs::path cfg = out / "heat.cfg";
    std::ofstream(cfg) << "problem = linear_advection\nexperiment = solve\n[problem]\nc = 0\n[solver]\nepsilon = 0.01\n"
                          "t_final = 0.002\nn_out = 1\n[noise]\nsigma0 = 0\npath_steps = 64\n";
    EXPECT_EQ(run_cli("solve -c " + cfg.string() + " -o " + out.string()), 0);
    EXPECT_NE(slurp(out / "solve_seed20240917" / "run_record.txt").find("AC3.heat_decay PASS"), std::string::npos);
}
