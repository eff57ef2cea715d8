#pragma once

#include "cdlayer/problem.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cdlayer {

/// Gauss-Legendre nodes and weights on [-1,1].
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;
    int order = 0;  ///< highest polynomial degree integrated exactly

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

inline constexpr int kMaxGaussPoints = 32;

/// Cached n-point Gauss-Legendre rule, 1 <= n <= kMaxGaussPoints.
const QuadratureRule& gauss_legendre(int n);

/// Applies `rule` on [a,b].
template <typename F>
double apply_rule(const QuadratureRule& rule, F&& f, double a, double b)
{
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) sum += rule.weights[q] * f(mid + half * rule.points[q]);
    return sum * half;
}

struct IntegrationOptions {
    /// Maximum number of bisections applied to any starting panel.
    int max_depth = 24;
    /// Starting panel boundaries strictly inside (a,b); use these to point the
    /// integrator at layers it could otherwise step over.
    std::span<const double> breakpoints{};
    /// Absolute floor below which panel differences are accepted.
    double abs_tol = 0.0;
};

/// Adaptive composite 5-point Gauss-Legendre quadrature. Each panel is
/// bisected until the panel estimate and the sum over its two halves agree
/// within rel_tol relative to the running integral magnitude.
double integrate(const RealFunction& f, double a, double b, double rel_tol,
                 const IntegrationOptions& options = {});

/// `count` points in (a,b) accumulating geometrically toward `toward`
/// (which must be a or b); the gap to `toward` halves at every step.
std::vector<double> graded_breakpoints(double a, double b, double toward, int count = 60);

enum class LayerIntegralKind {
    E,       ///< int_0^x 1/eps
    ETilde,  ///< int_0^x 1/sqrt(eps_upper eps)
    T,       ///< int_0^x sqrt(eps_lower/eps)
};

inline constexpr std::size_t kDefaultBreakpoints = 4096;

/// x -> int_0^x g(t) dt for a positive integrand g, tabulated at breakpoints
/// clustered toward x = 0 and completed by a local quadrature on evaluation.
class CumulativeIntegral {
public:
    explicit CumulativeIntegral(RealFunction integrand,
                                std::size_t breakpoint_count = kDefaultBreakpoints,
                                double rel_tol = 1e-13);

    /// Value at x in [0,1].
    double operator()(double x) const;
    [[nodiscard]] double total() const noexcept { return partial_sums_.back(); }

    [[nodiscard]] std::span<const double> breakpoints() const noexcept { return breakpoints_; }
    [[nodiscard]] std::span<const double> partial_sums() const noexcept { return partial_sums_; }
    [[nodiscard]] const RealFunction& integrand() const noexcept { return integrand_; }

private:
    RealFunction integrand_;
    std::vector<double> breakpoints_;
    std::vector<double> partial_sums_;
    double rel_tol_;
};

CumulativeIntegral layer_integral(const CoefficientSet& coeffs, LayerIntegralKind kind);

/// Solves g(x) = target on [0,1] for strictly increasing g by an Illinois
/// regula falsi safeguarded with bisection. Terminates once
/// |g(x) - target| <= tol * max(1, |target|) or the bracket has collapsed to
/// adjacent doubles. Throws Error(OutOfRange) when target lies outside
/// [g(0), g(1)].
double invert_monotone(const CumulativeIntegral& g, double target, double tol = 1e-12);

enum class DerivativeOrder { First, Second };

struct GridDerivative {
    std::vector<double> values;
    /// Nonzero where a one-sided stencil was used (the two endpoints).
    std::vector<unsigned char> one_sided;
};

/// Finite-difference derivative of nodal values on a nonuniform grid:
/// three-point stencils at interior nodes, one-sided three-point stencils at
/// the endpoints. Requires at least 5 strictly increasing nodes.
GridDerivative differentiate_grid(std::span<const double> values, std::span<const double> nodes,
                                  DerivativeOrder order);

}  // namespace cdlayer
