#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kinlab/duhamel_solver.hpp"
#include "test_support.hpp"

using namespace kinlab;
using std::numbers::pi;

namespace {

ProblemPtr make(const std::string& name, ProblemParams params = {}, NoiseModel nm = NoiseModel::linear) {
    return std::make_shared<const ProblemSpec>(builtin_problem(name, params, nm));
}

TorusField sine(std::size_t n) {
    return TorusField::from_function(n, [](double x) { return std::sin(2 * pi * x); });
}

} // namespace

TEST(HeatPropagate, Examples) {
    const auto s = sine(64);
    const auto g = heat_propagate(s, 0.1, 0.2);
    const double f = std::exp(-0.1 * 4 * pi * pi * 0.2);
    for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(g[i], f * s[i], 1e-14);
    EXPECT_EQ(heat_propagate(s, 0.1, 0.0), s);
    const auto c = heat_propagate(TorusField::constant(32, 2.5), 1.0, 3.0);
    for (double v : c.values()) EXPECT_NEAR(v, 2.5, 1e-14);
    EXPECT_THROW(heat_propagate(s, 0.0, 1.0), domain_error);
    EXPECT_THROW(heat_propagate(s, 0.1, -1.0), domain_error);
}

TEST(HeatPropagate, SemigroupAndMassProperty) {
    testgen::Gen g(31);
    for (int c = 0; c < 20; ++c) {
        const auto f = g.field(64);
        const double nu = g.uniform(0.01, 0.1), t1 = g.uniform(0.0, 0.01), t2 = g.uniform(0.0, 0.01);
        const auto a = heat_propagate(heat_propagate(f, nu, t1), nu, t2);
        const auto b = heat_propagate(f, nu, t1 + t2);
        for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
        EXPECT_NEAR(b.mean(), f.mean(), 1e-14);
    }
}

TEST(HeatPropagate, L1OperatorNorm) {
    // norm of the discrete kernel, obtained from a unit-mass spike
    const std::size_t n = 128;
    std::vector<double> d(n, 0.0);
    d[0] = static_cast<double>(n);
    for (double t : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
        const double nu = 0.05;
        const double nyquist = std::exp(-nu * std::pow(pi * static_cast<double>(n), 2) * t);
        const double norm = lp_norm(heat_propagate(TorusField(d), nu, t), 1.0);
        if (nyquist < 1e-12)
            EXPECT_LE(norm, 1.0 + 1e-9) << t;
        else
            EXPECT_LE(norm, 1.2) << t;
    }
}

TEST(Picard, FreeHeatConvergesInOneIteration) {
    const auto p = make("linear_advection", {{"c", 0.0}}, NoiseModel::none);
    DuhamelConfig dc;
    dc.n_modes = 64;
    dc.n_time = 64;
    const auto u0 = sine(64);
    const auto r = picard_solve(p, u0, dc, NoisePath(1, dc.t_final, 64));
    EXPECT_EQ(r.iterations, 1);
    const auto expect = heat_propagate(u0, dc.epsilon, dc.t_final);
    for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(r.trajectory.final_state()[i], expect[i], 1e-13);
    EXPECT_EQ(r.trajectory.solver, "duhamel");
    EXPECT_EQ(r.trajectory.states.size(), 65u);
}

TEST(Picard, ContractsOnViscousBurgers) {
    for (double s0 : {0.0, 0.2}) {
        const auto p = make("viscous_burgers", {{"sigma0", s0}});
        const DuhamelConfig dc;
        const auto r = picard_solve(p, sine(128), dc, NoisePath(7, dc.t_final, 512));
        ASSERT_GE(r.residuals.size(), 4u);
        for (std::size_t k = 3; k < r.residuals.size(); ++k) EXPECT_LT(r.residuals[k], r.residuals[k - 1]);
        EXPECT_LT(r.residuals.back(), dc.tol);
    }
}

TEST(Picard, AgreesWithFiniteVolumes) {
    const auto p = make("viscous_burgers", {{"sigma0", 0.2}});
    const DuhamelConfig dc;
    const NoisePath path(7, dc.t_final, 512);
    const auto u0 = sine(128);
    const auto r = picard_solve(p, u0, dc, path);
    SolverConfig c;
    c.n_cells = 128;
    c.epsilon = dc.epsilon;
    c.t_final = dc.t_final;
    c.n_out = 1;
    const auto tr = solve(p, u0, c, path);
    EXPECT_LE(l1_distance(tr.final_state(), r.trajectory.final_state()), 2e-2);
}

TEST(Picard, DeterministicAndValidated) {
    const auto p = make("het_burgers", {{"sigma0", 0.2}});
    DuhamelConfig dc;
    dc.n_modes = 64;
    dc.n_time = 256;
    const NoisePath path(3, dc.t_final, 16);
    const auto a = picard_solve(p, sine(64), dc, path);
    const auto b = picard_solve(p, sine(64), dc, path);
    EXPECT_EQ(a.residuals, b.residuals);
    for (std::size_t k = 0; k < a.trajectory.states.size(); ++k) EXPECT_EQ(a.trajectory.states[k], b.trajectory.states[k]);
    dc.epsilon = 0.0;
    EXPECT_THROW(picard_solve(p, sine(64), dc, path), domain_error);
    dc.epsilon = 0.05;
    EXPECT_THROW(picard_solve(p, sine(32), dc, path), resolution_mismatch);
}

TEST(Picard, ReportsNonContraction) {
    const auto p = make("viscous_burgers", {{"sigma0", 0.0}});
    DuhamelConfig dc;
    dc.t_final = 2.0;
    dc.epsilon = 0.001;
    dc.n_time = 64;
    dc.max_iters = 40;
    const auto u0 = TorusField::from_function(128, [](double x) { return 2.5 * std::sin(2 * pi * x); });
    EXPECT_THROW(picard_solve(p, u0, dc, NoisePath(1, 2.0, 64)), error);
}
