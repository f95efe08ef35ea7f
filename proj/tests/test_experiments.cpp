#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "kinlab/experiments.hpp"
#include "kinlab/report.hpp"
#include "test_support.hpp"

using namespace kinlab;
using testgen::Gen;

TEST(Stats, PairwiseSumAndMoments) {
    std::vector<double> x(1000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + 1);
    EXPECT_EQ(pairwise_sum(x), 500500.0);
    const auto m = mean_stderr(std::vector<double>{1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.stderr_, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_EQ(m.n, 4u);
}

TEST(Stats, PowerLawExamples) {
    std::vector<std::pair<double, double>> pts;
    for (double s : {0.01, 0.03, 0.1, 0.3}) pts.push_back({s, 3.0 * s * s});
    const auto f = fit_power_law(pts);
    EXPECT_NEAR(f.exponent, 2.0, 1e-12);
    EXPECT_NEAR(f.prefactor, 3.0, 1e-10);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_THROW(fit_power_law({{1, 1}, {2, 2}}), domain_error);
    EXPECT_THROW(fit_power_law({{1, 1}, {2, 0}, {3, 1}}), domain_error);
}

TEST(Stats, PowerLawRecoversNoisyExponent) {
    Gen g(51);
    for (int c = 0; c < 50; ++c) {
        const double beta = g.uniform(0.2, 2.0);
        std::vector<std::pair<double, double>> pts;
        for (int k = 0; k < 8; ++k) {
            const double s = std::pow(2.0, -k);
            pts.push_back({s, std::pow(s, beta) * std::exp(g.uniform(-0.01, 0.01))});
        }
        EXPECT_NEAR(fit_power_law(pts).exponent, beta, 0.02);
    }
}

TEST(Stats, EnvelopeDominatesData) {
    Gen g(52);
    std::vector<double> t, v;
    for (int k = 0; k <= 20; ++k) {
        t.push_back(0.05 * k);
        v.push_back(2.0 * std::exp(0.7 * t.back()) * std::exp(g.uniform(-0.05, 0.05)));
    }
    const auto e = fit_exponential_envelope(t, v);
    EXPECT_NEAR(e.B, 0.7, 0.1);
    for (std::size_t k = 0; k < t.size(); ++k) EXPECT_LE(v[k], e.A * std::exp(e.B * t[k]) * (1 + 1e-12));
}

TEST(Parallel, ResultsIndependentOfWorkers) {
    auto f = [](std::size_t k) { return std::sqrt(static_cast<double>(k)) * 1.5; };
    const auto a = map_samples<double>(101, f, 1);
    const auto b = map_samples<double>(101, f, 7);
    EXPECT_EQ(a, b);
    EXPECT_THROW(map_samples<double>(10, [](std::size_t k) -> double {
                     if (k == 3) throw domain_error("boom");
                     return 0.0;
                 }, 4),
                 domain_error);
}

TEST(Theory, Examples) {
    EXPECT_DOUBLE_EQ(theoretical_exponent(1.0, 1.0, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(theoretical_exponent(1.0, 0.6, 0.1, 0.5), 0.5);
    const double near = theoretical_exponent(1.0, 1.0, 1.0 - 1e-6);
    EXPECT_GT(near, 0.0);
    EXPECT_LT(near, 1e-5);
    EXPECT_THROW(theoretical_exponent(1.0, 1.0, 1.5), domain_error);
    EXPECT_THROW(theoretical_exponent(1.0, 1.0, 0.0), domain_error);
    EXPECT_THROW(theoretical_exponent(1.0, 0.5, 0.5), domain_error);
}

TEST(Theory, MinFormulaProperties) {
    Gen g(53);
    for (int c = 0; c < 500; ++c) {
        const double k1 = g.uniform(0.1, 1.0), ls = g.uniform(0.51, 1.0), mu = g.uniform(0.01, 0.99) * k1;
        const double e = theoretical_exponent(k1, ls, mu);
        EXPECT_GT(e, 0.0);
        EXPECT_LE(e, 1.0);
        EXPECT_LE(theoretical_exponent(k1, ls, mu, g.uniform(0.1, 1.0)), e);
    }
}

TEST(Experiments, InitialFamilies) {
    const TorusField s = initial_field("step", 8, 2.0, 1.0);
    EXPECT_EQ(s[0], 1.0);
    EXPECT_EQ(s[2], 3.0);
    EXPECT_EQ(s[5], 3.0);
    EXPECT_EQ(s[6], 1.0);
    EXPECT_NEAR(bv_seminorm(initial_field("step", 64, 1.0, 0.0)), 2.0, 1e-15);
    const TorusField c = initial_field("constant", 16, 5.0, 0.3);
    for (double v : c.values()) EXPECT_EQ(v, 0.3);
    EXPECT_NEAR(initial_field("sine", 128, 1.0, 0.0).mean(), 0.0, 1e-15);
    EXPECT_NEAR(initial_field("bump", 128, 1.0, 0.0).max_abs(), 1.0, 1e-3);
    EXPECT_THROW(initial_field("zigzag", 16, 1.0, 0.0), domain_error);
}

TEST(Experiments, PerturbationsMoveTheRightDistance) {
    const auto p = builtin_problem("het_burgers", {{"sigma0", 0.2}}, NoiseModel::linear);
    const Interval box = p.u_box;
    const auto ds = coefficient_distance(p, perturbed(p, Perturbation::sigma, 0.01), box);
    EXPECT_NEAR(ds.d_sigma, 0.01, 1e-12);
    EXPECT_EQ(ds.d_flux_u, 0.0);
    const auto dd = coefficient_distance(p, perturbed(p, Perturbation::diffusion, 0.1), box);
    EXPECT_NEAR(dd.d_sqrt_diff, 0.1, 1e-12);
    EXPECT_NEAR(composite_distance(ds, 0.5), std::sqrt(0.01), 1e-12);
}

TEST(Experiments, IdenticalDataGiveZeroDistance) {
    EnsembleConfig c;
    c.problem = "viscous_burgers";
    c.n_samples = 16;
    c.solver.n_cells = 32;
    c.solver.t_final = 0.1;
    c.solver.n_out = 4;
    c.v_offset = 0.0;
    const auto r = run_l1_stability(c);
    for (const auto& s : r.series) EXPECT_EQ(s.mean, 0.0);
    ASSERT_EQ(r.claims.size(), 1u);
    EXPECT_EQ(r.claims[0].claim_id, "AC5.contraction");
    EXPECT_EQ(r.claims[0].verdict, Verdict::pass);
}

TEST(Experiments, ConstantOffsetIsPreservedWithoutNoise) {
    // translation invariant flux, constant data: (v - u)_+ stays at the offset
    EnsembleConfig c;
    c.problem = "viscous_burgers";
    c.noise = NoiseModel::none;
    c.initial = "constant";
    c.offset = 0.3;
    c.n_samples = 16;
    c.solver.n_cells = 16;
    c.solver.t_final = 0.1;
    c.solver.n_out = 2;
    const auto r = run_l1_stability(c);
    for (const auto& s : r.series) {
        EXPECT_NEAR(s.mean, 0.1, 1e-15);
        EXPECT_EQ(s.stderr_, 0.0);
    }
}

TEST(Experiments, MonteCarloBandShrinksLikeInverseRoot) {
    // additive noise, F = 0: the cell mean is u0 mean + sigma0 W(T)
    const auto p = std::make_shared<const ProblemSpec>(
        builtin_problem("linear_advection", {{"c", 0.0}, {"sigma0", 0.5}}, NoiseModel::constant));
    SolverConfig c;
    c.n_cells = 8;
    c.t_final = 1.0;
    c.n_out = 1;
    auto band = [&](std::size_t n) {
        auto v = map_samples<double>(n, [&](std::size_t k) {
            return solve(p, TorusField::constant(8, 0.0), c, NoisePath(rng::sample_seed(77, k), 1.0, 4)).final_state().mean();
        });
        return mean_stderr(v);
    };
    const auto small = band(256), large = band(4096);
    EXPECT_NEAR(small.stderr_ / large.stderr_, 4.0, 0.6);
    EXPECT_NEAR(large.stderr_, 0.5 / 64.0, 0.1 * 0.5 / 64.0);
    EXPECT_LE(std::abs(large.mean), 4 * large.stderr_);
}

TEST(Experiments, SamplesShareOnlyTheirOwnPath) {
    EnsembleConfig c;
    EXPECT_EQ(c.path(3), c.path(3));
    EXPECT_NE(c.path(3).increments(), c.path(4).increments());
}

TEST(Experiments, ReproducibleAcrossWorkerCounts) {
    EnsembleConfig c;
    c.n_samples = 16;
    c.solver.n_cells = 32;
    c.solver.t_final = 0.1;
    c.solver.n_out = 4;
    c.path_steps = 4;
    auto csv = [&](unsigned w) {
        EnsembleConfig e = c;
        e.workers = w;
        std::ostringstream os;
        write_rate_csv(os, run_continuous_dependence(e).points);
        write_series_csv(os, run_l1_stability(e).series);
        write_series_csv(os, run_fractional_bv(e).bv);
        return os.str();
    };
    EXPECT_EQ(csv(1), csv(5));
}

TEST(Experiments, VerdictsAreThreeValued) {
    RateReport r;
    r.fit.exponent = 0.7;
    r.fit.r_squared = 0.99;
    r.exponent_stderr = 0.05;
    EXPECT_EQ(detail::rate_claim("x", r, 0.8, 0.9, 4.0).verdict, Verdict::inconclusive);
    r.exponent_stderr = 0.01;
    EXPECT_EQ(detail::rate_claim("x", r, 0.8, 0.9, 4.0).verdict, Verdict::fail);
    r.fit.exponent = 0.85;
    EXPECT_EQ(detail::rate_claim("x", r, 0.8, 0.9, 4.0).verdict, Verdict::pass);
    r.fit.r_squared = 0.5;
    EXPECT_EQ(detail::rate_claim("x", r, 0.8, 0.9, 4.0).verdict, Verdict::inconclusive);
    EXPECT_EQ(to_string(Verdict::inconclusive), "INCONCLUSIVE");
}

TEST(Experiments, RejectsBadLadders) {
    EnsembleConfig c;
    c.n_samples = 16;
    c.deltas = {0.01, 0.02, 0.03, 0.04};
    EXPECT_THROW(run_continuous_dependence(c), domain_error);
    c.eps_ladder = {0.1, 0.2, 0.05, 0.01};
    EXPECT_THROW(run_viscosity_cauchy(c), domain_error);
    c.lags = {1, 2};
    EXPECT_THROW(run_temporal_bv(c), domain_error);
}

TEST(KineticChecks, AllPass) {
    const auto checks = run_kinetic_checks(20240917, 200);
    ASSERT_EQ(checks.size(), 5u);
    for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.check_id << ' ' << c.max_abs_error;
}
