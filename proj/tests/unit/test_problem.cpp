#include "cdlayer/calculus.hpp"
#include "cdlayer/error.hpp"
#include "cdlayer/problem.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace cdlayer;
using cdlayer::testing::constant_coefficients;
using cdlayer::testing::linear_eps_coefficients;

namespace {

constexpr double kPi = std::numbers::pi;

TEST(Validation, ConstantCoefficientsPass)
{
    const auto report = validate_coefficients(constant_coefficients(0.01, 2.0, 1.0, 1.0, 1.0, 1.0));
    EXPECT_TRUE(report.valid());
    EXPECT_TRUE(report.warnings().empty());
    ASSERT_NE(report.find("b > beta"), nullptr);
    EXPECT_DOUBLE_EQ(report.find("b > beta")->margin, 1.0);
}

TEST(Validation, ConvectionBelowBeta)
{
    const auto report = validate_coefficients(constant_coefficients(0.01, 0.5, 1.0, 1.0, 1.0, 1.0));
    EXPECT_FALSE(report.valid());
    const auto bad = report.violations();
    ASSERT_EQ(bad.size(), 1u);
    EXPECT_EQ(bad[0].name, "b > beta");
    EXPECT_DOUBLE_EQ(bad[0].margin, -0.5);
    EXPECT_EQ(bad[0].outcome, CheckOutcome::Violated);
}

TEST(Validation, ConvectionEqualToBetaIsRejected)
{
    const auto report = validate_coefficients(constant_coefficients(0.01, 1.0, 1.0, 1.0, 1.0, 1.0));
    EXPECT_FALSE(report.find("b > beta")->passed());
}

TEST(Validation, TightCoercivityPasses)
{
    auto k = linear_eps_coefficients(0.01);
    k.c = ScalarFunction::constant(0.0);
    k.b = ScalarFunction::affine(2.0, 1.0);
    k.gamma = 0.5;
    const auto report = validate_coefficients(k);
    EXPECT_TRUE(report.valid());
    EXPECT_NEAR(report.find("c + b'/2 >= gamma")->margin, 0.0, 1e-14);
}

TEST(Validation, OverstatedGammaFails)
{
    auto k = linear_eps_coefficients(0.01);
    k.gamma = 1.5;
    const auto report = validate_coefficients(k);
    EXPECT_FALSE(report.find("c + b'/2 >= gamma")->passed());
    EXPECT_NEAR(report.find("c + b'/2 >= gamma")->margin, -0.5, 1e-14);
}

TEST(Validation, NegativeReactionFails)
{
    auto k = constant_coefficients(0.01, 2.0, -0.1, 1.0, 1.0, 1.0);
    const auto report = validate_coefficients(k);
    EXPECT_FALSE(report.find("c >= 0")->passed());
}

TEST(Validation, EpsilonBandChecked)
{
    auto k = linear_eps_coefficients(0.01);
    k.eps_upper = 0.015;
    auto report = validate_coefficients(k);
    EXPECT_FALSE(report.find("eps <= eps_upper")->passed());
    EXPECT_NEAR(report.find("eps <= eps_upper")->worst_point, 1.0, 1e-15);

    k = linear_eps_coefficients(0.01);
    k.eps_lower = 0.011;
    report = validate_coefficients(k);
    EXPECT_FALSE(report.find("eps >= eps_lower")->passed());
    EXPECT_EQ(report.find("eps >= eps_lower")->worst_point, 0.0);
}

TEST(Validation, SigmaMustMatchSampledMinimum)
{
    auto k = linear_eps_coefficients(0.01);
    k.sigma = 0.02;
    const auto report = validate_coefficients(k);
    EXPECT_FALSE(report.find("sigma == min eps'")->passed());
    EXPECT_NEAR(report.find("sigma == min eps'")->margin, -0.01, 1e-15);
}

TEST(Validation, DecreasingEpsIsAdvisoryOnly)
{
    auto k = constant_coefficients(0.01, 2.0, 1.0, 1.0, 1.0, 1.0);
    k.eps = ScalarFunction::affine(0.01, -0.005);
    k.eps_lower = 0.005;
    k.sigma = -0.005;
    const auto report = validate_coefficients(k);
    EXPECT_TRUE(report.valid());
    ASSERT_EQ(report.warnings().size(), 1u);
    EXPECT_EQ(report.warnings()[0].severity, CheckSeverity::Advisory);
}

TEST(Validation, SigmaBelowMinusBetaFails)
{
    auto k = constant_coefficients(2.0, 2.0, 1.0, 1.0, 1.0, 1.0);
    k.eps = ScalarFunction::affine(2.0, -1.5);
    k.eps_lower = 0.5;
    k.sigma = -1.5;
    EXPECT_FALSE(validate_coefficients(k).find("sigma > -beta")->passed());
}

TEST(Validation, NonFiniteSampleReported)
{
    auto k = constant_coefficients(0.01, 2.0, 1.0, 1.0, 1.0, 1.0);
    k.b.eval = [](double x) { return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 2.0; };
    const auto report = validate_coefficients(k);
    EXPECT_FALSE(report.valid());
    EXPECT_EQ(report.find("b > beta")->outcome, CheckOutcome::NonFinite);
    EXPECT_GT(report.find("b > beta")->worst_point, 0.5);
}

TEST(Validation, RejectsTooFewSamples)
{
    EXPECT_THROW(validate_coefficients(constant_coefficients(0.01, 2, 1, 1, 1, 1), 1), Error);
}

TEST(ManufacturedRhs, Polynomial)
{
    const ScalarFunction u{[](double x) { return x * (1 - x); }, [](double x) { return 1 - 2 * x; },
                           [](double) { return -2.0; }};
    const auto f = manufactured_rhs(u, constant_coefficients(1.0, 1.0, 0.0, 0.0, 0.5, 1.0));
    for (double x : {0.0, 0.25, 0.5, 0.9, 1.0}) EXPECT_NEAR(f(x), 1.0 + 2.0 * x, 1e-15);
}

TEST(ManufacturedRhs, ZeroSolution)
{
    const auto f = manufactured_rhs(ScalarFunction::constant(0.0), linear_eps_coefficients(0.01));
    for (double x : {0.0, 0.3, 1.0}) EXPECT_EQ(f(x), 0.0);
}

TEST(ManufacturedRhs, SineWithLinearDiffusion)
{
    const ScalarFunction u{[](double x) { return std::sin(kPi * x); },
                           [](double x) { return kPi * std::cos(kPi * x); },
                           [](double x) { return -kPi * kPi * std::sin(kPi * x); }};
    const auto f = manufactured_rhs(u, linear_eps_coefficients(0.01));
    EXPECT_NEAR(f(0.5), 0.015 * kPi * kPi + 1.0, 1e-12);

    // flux form -(eps u')' - b u' + c u with a fourth-order difference of the flux
    const double step = 1e-3;
    auto flux = [&](double t) { return 0.01 * (1 + t) * u.deriv(t); };
    for (double x : {0.2, 0.37, 0.81}) {
        const double dflux = (-flux(x + 2 * step) + 8 * flux(x + step) - 8 * flux(x - step) +
                              flux(x - 2 * step)) /
                             (12 * step);
        EXPECT_NEAR(f(x), -dflux - 2.0 * u.deriv(x) + u(x), 1e-10);
    }
}

TEST(ManufacturedRhs, NeedsSecondDerivative)
{
    ScalarFunction u = ScalarFunction::affine(0, 1);
    u.deriv2 = nullptr;
    EXPECT_THROW(manufactured_rhs(u, linear_eps_coefficients(0.01)), Error);
}

TEST(Scenarios, CatalogValues)
{
    const auto a = make_scenario("eps-const", 0.01);
    EXPECT_DOUBLE_EQ(a.coeffs.eps(0.5), 0.01);
    EXPECT_EQ(a.coeffs.sigma, 0.0);
    const auto b = make_scenario("eps-linear", 0.01);
    EXPECT_DOUBLE_EQ(b.coeffs.eps_upper, 0.02);
    EXPECT_DOUBLE_EQ(b.coeffs.sigma, 0.01);
    EXPECT_TRUE(validate_coefficients(make_scenario("manufactured", 0.001).coeffs).valid());
}

TEST(Scenarios, UnknownNameOrBadScale)
{
    EXPECT_THROW(make_scenario("nope", 0.01), Error);
    EXPECT_THROW(make_scenario("eps-const", 0.2), Error);
    EXPECT_THROW(make_scenario("eps-const", 0.0), Error);
    try {
        make_scenario("eps-const", -1.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parameter);
    }
}

TEST(Scenarios, FamilyMatchesDirectConstruction)
{
    const auto family = scenario_family("eps-exp");
    const auto s = family(1e-4);
    const auto direct = make_scenario("eps-exp", 1e-4);
    EXPECT_EQ(s.name, direct.name);
    for (double x : {0.0, 0.4, 1.0}) EXPECT_EQ(s.coeffs.eps(x), direct.coeffs.eps(x));
    EXPECT_EQ(builtin_scenarios(1e-3).size(), scenario_names().size());
}

class ScenarioProperty : public ::testing::TestWithParam<std::tuple<std::string, double>> {};

TEST_P(ScenarioProperty, ValidWithoutWarnings)
{
    const auto [name, eps0] = GetParam();
    const auto report = validate_coefficients(make_scenario(name, eps0).coeffs, 10'001);
    EXPECT_TRUE(report.valid());
    EXPECT_TRUE(report.warnings().empty());
}

TEST_P(ScenarioProperty, DerivativesConsistent)
{
    const auto [name, eps0] = GetParam();
    const auto s = make_scenario(name, eps0);
    for (const auto* fn : {&s.coeffs.eps, &s.coeffs.b}) EXPECT_LT(derivative_consistency(*fn), 1e-5);
    if (s.exemplars) EXPECT_LT(derivative_consistency(s.exemplars->smooth), 1e-5);
    if (eps0 >= 1e-2 && s.exact) EXPECT_LT(derivative_consistency(*s.exact), 1e-5);
}

class ExactScenarioProperty : public ScenarioProperty {};

TEST_P(ExactScenarioProperty, ExactVanishesOnBoundary)
{
    const auto [name, eps0] = GetParam();
    const auto s = make_scenario(name, eps0);
    ASSERT_TRUE(s.exact);
    EXPECT_NEAR((*s.exact)(0.0), 0.0, 1e-12);
    EXPECT_NEAR((*s.exact)(1.0), 0.0, 1e-12);
}

TEST_P(ExactScenarioProperty, ExactSatisfiesStrongForm)
{
    const auto [name, eps0] = GetParam();
    const auto s = make_scenario(name, eps0);
    ASSERT_TRUE(s.exact);
    const auto& u = *s.exact;
    const auto& k = s.coeffs;
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = unit(gen);
        const double terms[] = {k.eps(x) * u.deriv2(x), (k.b(x) + k.eps.deriv(x)) * u.deriv(x),
                                k.c(x) * u(x), k.f(x)};
        double scale = 1.0;
        for (double t : terms) scale = std::max(scale, std::abs(t));
        EXPECT_LE(std::abs(-terms[0] - terms[1] + terms[2] - terms[3]), 1e-10 * scale) << "x = " << x;
    }
}

TEST_P(ScenarioProperty, LayerExemplarDecay)
{
    const auto [name, eps0] = GetParam();
    const auto s = make_scenario(name, eps0);
    ASSERT_TRUE(s.exemplars);
    const auto& E = s.exemplars->layer;
    const auto e = layer_integral(s.coeffs, LayerIntegralKind::E);
    EXPECT_NEAR(E(0.0), 1.0, 1e-12);
    EXPECT_NEAR(E(1.0), 0.0, 1e-12);
    double sup0 = 0.0;
    double sup1 = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        // samples dense near 0 where the layer lives
        const double x = std::pow(static_cast<double>(i) / 2000.0, 3.0);
        const double weight = std::exp(s.coeffs.beta * e(x));
        if (!std::isfinite(weight)) continue;
        sup0 = std::max(sup0, std::abs(E(x)) * weight);
        sup1 = std::max(sup1, std::abs(E.deriv(x)) * s.coeffs.eps(x) * weight);
    }
    EXPECT_LE(sup0, 10.0);
    EXPECT_LE(sup1, 10.0);
}

INSTANTIATE_TEST_SUITE_P(Catalog, ScenarioProperty,
                         ::testing::Combine(::testing::ValuesIn(scenario_names()),
                                            ::testing::Values(0.1, 1e-3, 1e-5, 1e-8)));
INSTANTIATE_TEST_SUITE_P(Catalog, ExactScenarioProperty,
                         ::testing::Combine(::testing::Values("eps-const", "manufactured"),
                                            ::testing::Values(0.1, 1e-3, 1e-5, 1e-8)));

TEST(ManufacturedScenario, RhsMatchesHandDerivation)
{
    // u = cos(pi x/2) - (g - g1)/(1 - g1), g = exp(-e), eps = eps0 (1+x)^2, b = 2, c = 1
    const double eps0 = 1e-3;
    const auto s = make_scenario("manufactured", eps0);
    auto eps = [&](double x) { return eps0 * (1 + x) * (1 + x); };
    auto e = [&](double x) { return x / (eps0 * (1 + x)); };
    const double g1 = std::exp(-e(1.0));
    for (double x : {0.0, 1e-4, 3e-3, 0.1, 0.5, 0.99}) {
        const double sn = std::sin(0.5 * kPi * x);
        const double cs = std::cos(0.5 * kPi * x);
        const double deps = 2 * eps0 * (1 + x);
        const double smooth = 0.5 * kPi * (deps * sn + eps(x) * 0.5 * kPi * cs) + kPi * sn + cs;
        const double g = std::exp(-e(x));
        const double layer = (g / eps(x) + g - g1) / (1 - g1);
        const double expected = smooth - layer;
        EXPECT_LE(std::abs(s.coeffs.f(x) - expected), 1e-10 * std::max(1.0, std::abs(expected)))
            << "x = " << x;
    }
}

TEST(ErrorKinds, MessageCarriesKind)
{
    const Error e(ErrorKind::DegenerateRegime, "tau too large");
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateRegime);
    EXPECT_NE(std::string(e.what()).find("tau too large"), std::string::npos);
    EXPECT_FALSE(to_string(ErrorKind::Singular).empty());
}

}  // namespace
