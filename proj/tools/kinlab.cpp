// kinlab command-line driver.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "kinlab/kinlab.hpp"

namespace {

struct Options {
    std::string config_path;
    std::string out_dir = "runs";
    std::string problem = "het_burgers";
    std::optional<std::uint64_t> seed;
    bool echo_only = false;
};

int execute(const std::string& subcommand, const Options& opt) {
    using namespace kinlab;
    const std::string experiment = experiment_for_subcommand(subcommand);
    ExperimentConfig cfg;
    try {
        std::string text;
        if (opt.config_path.empty()) {
            text = "problem = " + opt.problem + "\nexperiment = " + experiment + "\n";
        } else {
            std::ifstream in(opt.config_path);
            if (!in) throw config_error("cannot open config file " + opt.config_path);
            std::ostringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        }
        cfg = parse_config(text);
        if (cfg.experiment != experiment)
            throw config_error("config selects experiment '" + cfg.experiment + "' but the subcommand is " + subcommand);
        if (opt.seed) {
            cfg.ensemble.master_seed = *opt.seed;
            cfg.echo = canonical_echo(cfg);
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const kinlab::error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (opt.echo_only) {
        std::cout << cfg.echo;
        return 0;
    }
    try {
        const RunOutcome out = run(subcommand, cfg, opt.out_dir, std::cout);
        std::cout << "output: " << out.directory.string() << "\n";
        return out.exit_code;
    } catch (const kinlab::error& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for stochastic degenerate parabolic-hyperbolic conservation laws"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(KINLAB_VERSION));

    Options opt;
    std::string chosen;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"l1-stability", "L1 stability of coupled runs"},
        {"fractional-bv", "Nikolskii and BV semi-norm propagation"},
        {"continuous-dependence", "rate of dependence on the coefficients"},
        {"viscosity-cauchy", "Cauchy property of the vanishing viscosity ladder"},
        {"temporal-bv", "temporal BV exponent from lagged differences"},
        {"kinetic-checks", "randomised kinetic identity suite"},
        {"solve", "single trajectory to CSV"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", opt.config_path, "config file ([problem]/[solver]/[noise]/[experiment])")
            ->check(CLI::ExistingFile);
        sub->add_option("-o,--out", opt.out_dir, "output root directory")->capture_default_str();
        sub->add_option("-p,--problem", opt.problem, "problem when no config file is given")->capture_default_str();
        sub->add_option_function<std::uint64_t>("-s,--seed", [&](const std::uint64_t& s) { opt.seed = s; },
                                                "override noise.master_seed");
        sub->add_flag("--echo", opt.echo_only, "print the effective configuration and exit");
        sub->callback([&chosen, n = name] { chosen = n; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return execute(chosen, opt);
}
