#include "cdlayer/calculus.hpp"
#include "cdlayer/error.hpp"
#include "cdlayer/mesh.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

using namespace cdlayer;
using cdlayer::testing::constant_coefficients;
using cdlayer::testing::linear_eps_coefficients;

namespace {

LayerMesh mesh_for(const CoefficientSet& k, double h, double delta = 1.0)
{
    return build_mesh(k, layer_integral(k, LayerIntegralKind::E), h, delta);
}

TEST(TauStar, ConstantEpsilon)
{
    const auto k = constant_coefficients(0.01, 2, 1, 1, 1, 1);
    const double tau = compute_tau_star(k, layer_integral(k, LayerIntegralKind::E), 0.1);
    EXPECT_NEAR(tau, 0.02 * std::log(10.0), 1e-12);
    EXPECT_NEAR(tau, 0.04605170, 1e-8);
}

TEST(TauStar, LinearEpsilon)
{
    const auto k = linear_eps_coefficients(0.01);
    const double tau = compute_tau_star(k, layer_integral(k, LayerIntegralKind::E), 0.1);
    EXPECT_NEAR(tau, std::pow(10.0, 0.02) - 1.0, 1e-12);
    EXPECT_NEAR(tau, 0.0471285, 1e-7);
}

TEST(TauStar, DegenerateBeyondHalf)
{
    const auto k = constant_coefficients(0.4, 2, 1, 1, 1, 1);
    try {
        compute_tau_star(k, layer_integral(k, LayerIntegralKind::E), 0.5);
        FAIL() << "expected degenerate regime (tau* = 0.8 ln 2)";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateRegime);
    }
}

TEST(TauStar, DegenerateBeyondDomain)
{
    const auto k = constant_coefficients(0.1, 2, 1, 1, 1, 1);
    try {
        compute_tau_star(k, layer_integral(k, LayerIntegralKind::E), 0.001);
        FAIL() << "expected degenerate regime";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateRegime);
    }
}

TEST(TauStar, RejectsBadH)
{
    const auto k = constant_coefficients(0.01, 2, 1, 1, 1, 1);
    const auto e = layer_integral(k, LayerIntegralKind::E);
    for (double h : {0.0, 1.0, -0.5, 2.0}) {
        try {
            compute_tau_star(k, e, h);
            FAIL() << "h = " << h;
        } catch (const Error& err) {
            EXPECT_EQ(err.kind(), ErrorKind::Parameter);
        }
    }
}

TEST(BuildMesh, GeometricSequenceOracle)
{
    const auto k = constant_coefficients(0.01, 2, 1, 1, 1, 1);
    const auto mesh = mesh_for(k, 0.1);
    const double tau_star = 0.02 * std::log(10.0);
    std::size_t expected_n = 0;
    while (0.001 * std::pow(1.1, static_cast<double>(expected_n)) < tau_star) ++expected_n;
    EXPECT_EQ(expected_n, 41u);
    EXPECT_EQ(mesh.n_star, expected_n);
    EXPECT_EQ(mesh.tau_index, expected_n + 1);
    EXPECT_EQ(mesh.nodes[1], 0.001);
    for (std::size_t i = 1; i <= mesh.tau_index; ++i) {
        EXPECT_NEAR(mesh.nodes[i], 0.001 * std::pow(1.1, static_cast<double>(i - 1)), 1e-15 * i);
    }
    EXPECT_NEAR(mesh.tau(), 0.001 * std::pow(1.1, 41.0), 1e-14);
    EXPECT_NEAR(mesh.tau(), 0.0498, 1e-4);
    const auto coarse = static_cast<std::size_t>(std::ceil((1.0 - mesh.tau()) / 0.1));
    EXPECT_EQ(mesh.size(), mesh.tau_index + coarse + 1);
    EXPECT_TRUE(check_mesh_invariants(mesh, k).empty());
}

TEST(BuildMesh, CoarseSpacingLinearEpsilon)
{
    const auto k = linear_eps_coefficients(0.01);
    const auto mesh = mesh_for(k, 0.05);
    const double tau = mesh.tau();
    const double spacing = (1.0 - tau) / std::ceil((1.0 - tau) / 0.05);
    EXPECT_LE(spacing, 0.05);
    for (std::size_t i = mesh.tau_index + 1; i < mesh.size(); ++i) {
        EXPECT_NEAR(mesh.nodes[i] - mesh.nodes[i - 1], spacing, 1e-14);
    }
    EXPECT_EQ(mesh.nodes.front(), 0.0);
    EXPECT_EQ(mesh.nodes.back(), 1.0);
}

TEST(BuildMesh, DeltaScalesFirstStep)
{
    const auto k = constant_coefficients(1e-4, 2, 1, 1, 1, 1);
    const auto mesh = mesh_for(k, 1.0 / 16, 0.5);
    EXPECT_EQ(mesh.nodes[1], 1.0 / 16 * 0.5 * 1e-4);
    EXPECT_TRUE(check_mesh_invariants(mesh, k).empty());
    EXPECT_THROW(mesh_for(k, 1.0 / 16, 0.0), Error);
}

TEST(BuildMesh, NodeCap)
{
    const auto k = constant_coefficients(1e-6, 2, 1, 1, 1, 1);
    try {
        build_mesh(k, layer_integral(k, LayerIntegralKind::E), 1.0 / 64, 1.0, 50);
        FAIL() << "expected resource error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Resource);
    }
}

TEST(BuildMesh, Regions)
{
    const auto mesh = mesh_for(constant_coefficients(1e-3, 2, 1, 1, 1, 1), 0.125);
    EXPECT_EQ(mesh.region(0), MeshRegion::Graded);
    EXPECT_EQ(mesh.region(mesh.tau_index), MeshRegion::Graded);
    EXPECT_EQ(mesh.region(mesh.tau_index + 1), MeshRegion::Coarse);
    EXPECT_EQ(mesh.element_count() + 1, mesh.size());
}

TEST(PredictCardinality, Formula)
{
    const auto k = constant_coefficients(0.01, 2, 1, 1, 1, 1);
    EXPECT_NEAR(predict_cardinality(k, 0.1), std::log(std::log(10.0) / 0.1) / 0.1, 1e-12);
    EXPECT_NEAR(predict_cardinality(k, 0.1), 31.37, 5e-3);

    auto band = k;
    band.eps_lower = 1e-6;
    band.eps_upper = 2e-6;
    EXPECT_NEAR(0.1 * predict_cardinality(band, 0.1), 3.8298, 1e-4);
}

TEST(PredictCardinality, GuardNearOne)
{
    const auto k = constant_coefficients(0.01, 2, 1, 1, 1, 1);
    EXPECT_THROW(predict_cardinality(k, 0.9), Error);
    EXPECT_THROW(predict_cardinality(k, 1.0), Error);
}

TEST(UniformMesh, Equidistant)
{
    const auto mesh = uniform_mesh(4);
    ASSERT_EQ(mesh.size(), 5u);
    EXPECT_EQ(mesh.nodes[2], 0.5);
    EXPECT_EQ(mesh.h, 0.25);
    EXPECT_THROW(uniform_mesh(1), Error);
}

TEST(MeshInvariants, DetectCorruption)
{
    const auto k = constant_coefficients(1e-3, 2, 1, 1, 1, 1);
    auto mesh = mesh_for(k, 0.125);
    mesh.nodes[3] *= 1.01;
    EXPECT_FALSE(check_mesh_invariants(mesh, k).empty());
    mesh = mesh_for(k, 0.125);
    mesh.nodes.back() = 0.999;
    EXPECT_FALSE(check_mesh_invariants(mesh, k).empty());
}

class MeshProperty : public ::testing::TestWithParam<std::string> {};

TEST_P(MeshProperty, InvariantsAcrossSweep)
{
    for (double eps0 : {1e-2, 1e-3, 1e-5, 1e-7}) {
        const auto s = make_scenario(GetParam(), eps0);
        const auto& k = s.coeffs;
        const auto e = layer_integral(k, LayerIntegralKind::E);
        for (int inv_h = 8; inv_h <= 512; inv_h *= 2) {
            const double h = 1.0 / inv_h;
            LayerMesh mesh;
            try {
                mesh = build_mesh(k, e, h);
            } catch (const Error& err) {
                ASSERT_EQ(err.kind(), ErrorKind::DegenerateRegime);
                continue;
            }
            SCOPED_TRACE("eps0 = " + std::to_string(eps0) + ", h = 1/" + std::to_string(inv_h));
            EXPECT_TRUE(check_mesh_invariants(mesh, k).empty());
            EXPECT_LE(std::exp(-k.beta * e(mesh.tau())), h * h * (1 + 1e-9));
            const double lower = -(2.0 / k.beta) * k.eps_lower * std::log(h);
            const double upper = -(2.0 / k.beta) * k.eps_upper * std::log(h);
            EXPECT_GE(mesh.tau_star, lower * (1 - 1e-12));
            EXPECT_LE(mesh.tau_star, upper * (1 + 1e-12));
            EXPECT_LE(static_cast<double>(mesh.size()), 4.0 * predict_cardinality(k, h));
        }
    }
}

TEST_P(MeshProperty, GradedCountFollowsScaledTransitionPoint)
{
    // N* is the smallest n with h delta eps_lower (1+h)^n >= tau*, so it is a
    // nondecreasing function of tau*/eps_lower.
    const double h = 1.0 / 32;
    std::vector<std::pair<double, std::size_t>> samples;
    for (double eps0 : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
        const auto k = make_scenario(GetParam(), eps0).coeffs;
        const auto mesh = build_mesh(k, layer_integral(k, LayerIntegralKind::E), h);
        const double ratio = mesh.tau_star / k.eps_lower;
        const auto oracle =
            static_cast<std::size_t>(std::ceil(std::log(ratio / h) / std::log1p(h) - 1e-9));
        EXPECT_NEAR(static_cast<double>(mesh.n_star), static_cast<double>(oracle), 1.0) << eps0;
        samples.emplace_back(ratio, mesh.n_star);
    }
    std::sort(samples.begin(), samples.end());
    for (std::size_t i = 1; i < samples.size(); ++i) EXPECT_GE(samples[i].second, samples[i - 1].second);
}

TEST(MeshMonotonicity, ConstantEpsilonGradedCountGrowsAsEpsShrinks)
{
    const double h = 1.0 / 32;
    std::size_t previous = 0;
    for (double eps0 : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
        const auto k = make_scenario("eps-const", eps0).coeffs;
        const auto mesh = build_mesh(k, layer_integral(k, LayerIntegralKind::E), h);
        EXPECT_GE(mesh.n_star, previous) << "eps0 = " << eps0;
        previous = mesh.n_star;
    }
}

TEST(MeshMonotonicity, VariableEpsilonCanLoseGradedNodes)
{
    // tau*/eps0 = exp(2 eps0 ln 32) - 1 over eps0 shrinks toward 2 ln 32 as eps0 -> 0
    const double h = 1.0 / 32;
    auto count = [h](double eps0) {
        const auto k = make_scenario("eps-linear", eps0).coeffs;
        return build_mesh(k, layer_integral(k, LayerIntegralKind::E), h).n_star;
    };
    EXPECT_GT(count(1e-2), count(1e-3));
    EXPECT_EQ(count(1e-6), count(1e-8));
}

INSTANTIATE_TEST_SUITE_P(Catalog, MeshProperty, ::testing::ValuesIn(scenario_names()));

}  // namespace
