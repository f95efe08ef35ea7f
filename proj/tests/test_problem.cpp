#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kinlab/problem.hpp"
#include "test_support.hpp"

using namespace kinlab;
using testgen::Gen;

namespace {

const char* const kBuiltins[] = {"het_burgers", "viscous_burgers", "porous_medium", "linear_advection"};

}

TEST(BuiltinProblem, LinearAdvection) {
    const auto s = builtin_problem("linear_advection", {{"c", 1.0}, {"sigma0", 0.0}});
    Gen g(10);
    for (int k = 0; k < 50; ++k) {
        const double u = g.uniform(-3, 3), x = g.uniform();
        EXPECT_EQ(s.flux_u(u, x), 1.0);
        EXPECT_EQ(s.flux_x(u, x), 0.0);
        EXPECT_EQ(s.diffusion(u), 0.0);
        EXPECT_EQ(s.sigma(u), 0.0);
    }
}

TEST(BuiltinProblem, PorousMediumKirchhoff) {
    const auto s = builtin_problem("porous_medium", {{"m", 2.0}});
    for (double u : {-2.0, -0.3, 0.0, 0.5, 1.7}) {
        EXPECT_NEAR(s.kirchhoff(u), std::copysign(u * u, u), 1e-14);
        EXPECT_NEAR(s.sqrt_diffusion(u), std::sqrt(2 * std::abs(u)), 1e-14);
    }
    const auto [B, Bh] = kirchhoff(s, 1.0);
    EXPECT_NEAR(B, 1.0, 1e-14);
    EXPECT_NEAR(Bh, 2 * std::sqrt(2.0) / 3, 1e-14);
}

TEST(BuiltinProblem, HetBurgersTranslationInvariantReduction) {
    const auto s = builtin_problem("het_burgers", {{"eps_c", 0.0}});
    EXPECT_TRUE(s.translation_invariant);
    Gen g(11);
    for (int k = 0; k < 50; ++k) EXPECT_EQ(s.flux_x(g.uniform(-3, 3), g.uniform()), 0.0);
    EXPECT_FALSE(builtin_problem("het_burgers", {{"eps_c", 0.5}}).translation_invariant);
}

TEST(BuiltinProblem, UnknownNameAndBadParams) {
    EXPECT_THROW(builtin_problem("navier_stokes"), domain_error);
    EXPECT_THROW(builtin_problem("het_burgers", {{"eps_c", 1.0}}), domain_error);
    EXPECT_THROW(builtin_problem("porous_medium", {{"m", 0.5}}), domain_error);
}

TEST(BuiltinProblem, NoiseModels) {
    const double s0 = 0.3;
    EXPECT_EQ(builtin_problem("het_burgers", {{"sigma0", s0}}, NoiseModel::linear).sigma(2.0), 0.6);
    EXPECT_EQ(builtin_problem("het_burgers", {{"sigma0", s0}}, NoiseModel::constant).sigma(2.0), s0);
    EXPECT_NEAR(builtin_problem("het_burgers", {{"sigma0", s0}}, NoiseModel::sqrt_one_plus).sigma(2.0), s0 * std::sqrt(5.0),
                1e-15);
    EXPECT_EQ(builtin_problem("het_burgers", {{"sigma0", s0}}, NoiseModel::none).sigma(2.0), 0.0);
    EXPECT_EQ(noise_model_from_string(to_string(NoiseModel::sqrt_one_plus)), NoiseModel::sqrt_one_plus);
    EXPECT_THROW(noise_model_from_string("cubic"), domain_error);
}

// Declared Hoelder and growth conditions hold on random probes of the box.
TEST(BuiltinProblem, HoelderAssumptionsHoldOnProbes) {
    Gen g(12);
    for (const char* name : kBuiltins) {
        for (NoiseModel nm : {NoiseModel::linear, NoiseModel::sqrt_one_plus, NoiseModel::constant}) {
            const auto s = builtin_problem(name, {{"sigma0", 0.4}}, nm);
            const auto& sm = s.smoothness;
            const auto& gr = s.growth;
            for (int k = 0; k < 400; ++k) {
                const double u = g.uniform(s.u_box.lo, s.u_box.hi), v = g.uniform(s.u_box.lo, s.u_box.hi);
                const double x = g.uniform(), y = g.uniform();
                const double du = std::abs(u - v);
                const double dxy = std::min(std::abs(x - y), 1.0 - std::abs(x - y));
                EXPECT_LE(std::abs(s.flux_u(u, x) - s.flux_u(v, x)),
                          gr.C_F1 * (std::pow(std::abs(u), gr.p - 1) + std::pow(std::abs(v), gr.p - 1) + 1) *
                                  std::pow(du, sm.kappa_F1) + 1e-12)
                    << name;
                EXPECT_LE(std::abs(s.flux_x(u, x) - s.flux_x(u, y)),
                          gr.C_F2 * (std::pow(std::abs(u), gr.q) + 1) * std::pow(dxy, sm.kappa_F2) + 1e-12)
                    << name;
                EXPECT_LE(std::abs(s.sigma(u) - s.sigma(v)), gr.C_sigma * std::pow(du, sm.lambda_sigma) + 1e-12)
                    << name;
                EXPECT_GE(s.diffusion(u), 0.0);
                EXPECT_LE(s.diffusion(u), gr.C_a * (std::pow(std::abs(u), gr.a_order) + 1) + 1e-12);
                EXPECT_NEAR(s.sqrt_diffusion(u) * s.sqrt_diffusion(u), s.diffusion(u), 1e-10);
            }
            EXPECT_GT(sm.lambda_sigma, 0.5);
            // m = 2 sits on the boundary: sqrt(2|u|) is exactly 1/2-Hoelder
            if (std::string(name) == "porous_medium") {
                EXPECT_EQ(sm.gamma_alpha, 0.5);
            } else {
                EXPECT_GT(sm.gamma_alpha, 0.5);
            }
        }
    }
}

TEST(Kirchhoff, ExamplesAndQuadratureFallback) {
    const auto p = builtin_problem("porous_medium", {{"m", 3.0}});
    EXPECT_EQ(kirchhoff(p, 0.0), std::make_pair(0.0, 0.0));
    auto unit = builtin_problem("viscous_burgers", {{"nu", 1.0}});
    const auto [B, Bh] = kirchhoff(unit, 2.0);
    EXPECT_NEAR(B, 2.0, 1e-14);
    EXPECT_NEAR(Bh, 2.0, 1e-14);
    // drop the closed forms: quadrature must agree
    ProblemSpec q = p;
    q.kirchhoff = nullptr;
    q.kirchhoff_half = nullptr;
    for (double u : {-1.5, -0.2, 0.7, 2.0}) {
        const auto exact = kirchhoff(p, u);
        const auto numeric = kirchhoff(q, u);
        EXPECT_NEAR(numeric.first, exact.first, 1e-10);
        EXPECT_NEAR(numeric.second, exact.second, 1e-10);
    }
}

TEST(Kirchhoff, Monotone) {
    Gen g(13);
    for (const char* name : kBuiltins) {
        const auto s = perturb::add_viscosity(builtin_problem(name), 0.0);
        for (int k = 0; k < 200; ++k) {
            double u = g.uniform(-3, 3), v = g.uniform(-3, 3);
            if (u > v) std::swap(u, v);
            const auto a = kirchhoff(s, u), b = kirchhoff(s, v);
            EXPECT_LE(a.first, b.first + 1e-12);
            EXPECT_LE(a.second, b.second + 1e-12);
        }
    }
}

TEST(CoefficientDistance, Examples) {
    const auto p = builtin_problem("het_burgers", {{"sigma0", 0.2}});
    const auto d0 = coefficient_distance(p, p, p.u_box);
    EXPECT_EQ(d0.d_flux_u, 0.0);
    EXPECT_EQ(d0.d_div_flux, 0.0);
    EXPECT_EQ(d0.d_sqrt_diff, 0.0);
    EXPECT_EQ(d0.d_sigma, 0.0);
    const auto ds = coefficient_distance(p, perturb::sigma_shift(p, 0.03), p.u_box);
    EXPECT_NEAR(ds.d_sigma, 0.03, 1e-15);
    EXPECT_THROW(coefficient_distance(p, p, p.u_box, 32), domain_error);

    // viscosity shift: sup |sqrt(a + eps) - sqrt(a)| <= sqrt(eps), equality at the degeneracy u = 0
    const double eps = 0.01;
    const auto pm = builtin_problem("porous_medium", {{"m", 2.0}});
    const auto dv = coefficient_distance(pm, perturb::add_viscosity(pm, eps), pm.u_box, 513);
    EXPECT_LE(dv.d_sqrt_diff, std::sqrt(eps) + 1e-15);
    EXPECT_NEAR(dv.d_sqrt_diff, std::sqrt(eps), 1e-12);
    const auto dh = coefficient_distance(p, perturb::add_viscosity(p, eps), p.u_box);
    EXPECT_NEAR(dh.d_sqrt_diff, std::sqrt(eps), 1e-15);
}

TEST(CoefficientDistance, SymmetricAndTriangle) {
    const auto p = builtin_problem("het_burgers", {{"sigma0", 0.2}});
    const auto q = perturb::flux_u_shift(perturb::sigma_shift(p, 0.05), 0.02);
    const auto r = perturb::div_flux_source(perturb::add_viscosity(p, 0.01), 0.3);
    const Interval box = p.u_box;
    const auto pq = coefficient_distance(p, q, box, 64), qp = coefficient_distance(q, p, box, 64);
    EXPECT_EQ(pq.d_flux_u, qp.d_flux_u);
    EXPECT_EQ(pq.d_div_flux, qp.d_div_flux);
    EXPECT_EQ(pq.d_sqrt_diff, qp.d_sqrt_diff);
    EXPECT_EQ(pq.d_sigma, qp.d_sigma);
    const auto pr = coefficient_distance(p, r, box, 64), qr = coefficient_distance(q, r, box, 64);
    EXPECT_LE(pr.d_flux_u, pq.d_flux_u + qr.d_flux_u + 1e-14);
    EXPECT_LE(pr.d_div_flux, pq.d_div_flux + qr.d_div_flux + 1e-14);
    EXPECT_LE(pr.d_sqrt_diff, pq.d_sqrt_diff + qr.d_sqrt_diff + 1e-14);
    EXPECT_LE(pr.d_sigma, pq.d_sigma + qr.d_sigma + 1e-14);
    EXPECT_NEAR(pr.d_div_flux, 0.3, 1e-12);
    EXPECT_NEAR(pq.d_flux_u, 0.02, 1e-14);
}

TEST(SupDivFluxU, HetBurgers) {
    const auto p = builtin_problem("het_burgers", {{"eps_c", 0.5}});
    // D_x F_u = eps_c 2 pi cos(2 pi x) u, largest at |u| = 3, x = 0
    EXPECT_NEAR(sup_div_flux_u(p, p.u_box), 0.5 * 2 * std::numbers::pi * 3, 1e-6);
    EXPECT_EQ(sup_div_flux_u(builtin_problem("viscous_burgers"), p.u_box), 0.0);
}
