#include "cdlayer/verify.hpp"

#include "cdlayer/error.hpp"
#include "cdlayer/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace cdlayer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kSigmaSamples = 1001;
constexpr double kLemmaQuadTol = 1e-12;
constexpr double kBarrierTolerance = 1e-12;

std::string eps_label(double eps0)
{
    std::ostringstream out;
    out << eps0;
    return out.str();
}

// Uniform double in [0,1) from the top 53 bits, so draws do not depend on the
// standard library's distribution implementation.
double unit_draw(std::mt19937_64& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

template <typename Bound>
BoundCheckReport ratio_check(std::string name, const FemSolution& reference, int order, Bound&& bound)
{
    if (reference.mesh().h > kMaxReferenceH * (1.0 + 1e-12)) {
        throw Error(ErrorKind::Configuration, "reference mesh too coarse; need h <= 1/512");
    }
    const auto nodes = reference.nodes();
    const auto values = reference.coefficients();
    std::vector<double> w;
    if (order == 0) {
        w.assign(values.begin(), values.end());
    } else {
        w = differentiate_grid(values, nodes,
                               order == 1 ? DerivativeOrder::First : DerivativeOrder::Second)
                .values;
    }
    const std::size_t skip = order == 2 ? 2 : 1;

    BoundCheckReport r;
    r.name = std::move(name);
    r.tolerance = 0.0;
    double sup = 0.0;
    for (std::size_t i = skip; i + skip < nodes.size(); ++i) {
        const double ratio = std::abs(w[i]) / bound(nodes[i]);
        ++r.sample_count;
        if (!(ratio <= sup)) {
            sup = std::isnan(ratio) ? kInf : ratio;
            r.worst_point = nodes[i];
        }
    }
    r.measured = sup;
    r.passed = std::isfinite(sup);
    r.worst_margin = r.passed ? 0.0 : -kInf;
    return r;
}

}  // namespace

BoundCheckReport check_integral_lemma(const CoefficientSet& coeffs, double a, double x, int ell,
                                      double gamma)
{
    if (!(a >= 0.0 && a < x && x <= 1.0)) {
        throw Error(ErrorKind::Parameter, "integral lemma needs 0 <= a < x <= 1");
    }
    if (ell < 0) throw Error(ErrorKind::Parameter, "ell must be nonnegative");
    if (!coeffs.eps.has_deriv()) throw Error(ErrorKind::Parameter, "integral lemma needs eps'");

    double sigma0 = kInf;
    for (std::size_t i = 0; i < kSigmaSamples; ++i) {
        const double t = a + (x - a) * static_cast<double>(i) / static_cast<double>(kSigmaSamples - 1);
        sigma0 = std::min(sigma0, coeffs.eps.deriv(t));
    }
    if (!(sigma0 >= 0.0)) throw Error(ErrorKind::Parameter, "eps' < 0 somewhere on [a,x]");
    const double p = static_cast<double>(ell + 1);
    const double denom = gamma + p * sigma0;
    if (!(denom > 0.0)) throw Error(ErrorKind::Parameter, "gamma must exceed -(ell+1) sigma0");

    const auto& eps = coeffs.eps;
    const RealFunction inv_eps = [&eps](double t) { return 1.0 / eps(t); };
    // e_a(x) - e_a(t), integrated directly so that the exponent keeps full
    // relative accuracy near t = x.
    auto distance_to_x = [&](double t) {
        if (t >= x) return 0.0;
        return integrate(inv_eps, t, x, 1e-14);
    };
    const double e_ax = distance_to_x(a);

    // Both sides are scaled by exp(-gamma e_a(x)) for gamma >= 0.
    const bool scaled = gamma >= 0.0;
    const RealFunction integrand = [&](double t) {
        const double exponent = scaled ? -gamma * distance_to_x(t) : gamma * (e_ax - distance_to_x(t));
        return std::pow(eps(t), ell) * std::exp(exponent);
    };
    const auto breaks = graded_breakpoints(a, x, scaled ? x : a);
    IntegrationOptions opts;
    opts.breakpoints = breaks;
    opts.max_depth = 40;
    const double lhs = integrate(integrand, a, x, kLemmaQuadTol, opts);

    const double eps_x = std::pow(eps(x), p);
    const double eps_a = std::pow(eps(a), p);
    const double rhs = scaled ? (eps_x - eps_a * std::exp(-gamma * e_ax)) / denom
                              : (eps_x * std::exp(gamma * e_ax) - eps_a) / denom;

    BoundCheckReport r;
    r.name = "integral lemma";
    r.sample_count = 1;
    r.worst_point = x;
    r.tolerance = kIntegralLemmaTolerance;
    r.measured = lhs;
    const double scale = std::abs(rhs) > 0.0 ? std::abs(rhs) : 1.0;
    r.worst_margin = (rhs - lhs) / scale;
    r.passed = r.worst_margin >= -r.tolerance;
    return r;
}

double barrier_operator(const CoefficientSet& coeffs, double amplitude, double x, double e_x)
{
    const double beta = coeffs.beta;
    return amplitude * (beta * (coeffs.b(x) - beta) / coeffs.eps(x) + coeffs.c(x)) *
           std::exp(-beta * e_x);
}

double barrier_operator_expanded(const CoefficientSet& coeffs, double amplitude, double x, double e_x)
{
    const double beta = coeffs.beta;
    const double eps = coeffs.eps(x);
    const double deps = coeffs.eps.deriv(x);
    const double phi = amplitude * std::exp(-beta * e_x);
    const double dphi = -beta / eps * phi;
    const double d2phi = beta * (beta + deps) / (eps * eps) * phi;
    return -eps * d2phi - (coeffs.b(x) + deps) * dphi + coeffs.c(x) * phi;
}

BoundCheckReport check_barrier_operator(const CoefficientSet& coeffs, const CumulativeIntegral& e,
                                        double amplitude, std::size_t sample_count)
{
    if (sample_count < 2) throw Error(ErrorKind::Parameter, "need at least 2 samples");
    if (!(amplitude > 0.0)) throw Error(ErrorKind::Parameter, "amplitude must be positive");
    const double beta = coeffs.beta;
    double lowest = kInf;
    double scale = 0.0;
    BoundCheckReport r;
    r.name = "barrier operator";
    r.sample_count = sample_count;
    r.tolerance = kBarrierTolerance;
    for (std::size_t i = 0; i < sample_count; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(sample_count - 1);
        const double value = barrier_operator(coeffs, amplitude, x, e(x));
        scale = std::max(scale, amplitude * (beta * std::abs(coeffs.b(x) - beta) / coeffs.eps(x) +
                                             std::abs(coeffs.c(x))));
        if (!(value >= lowest)) {
            lowest = std::isnan(value) ? -kInf : value;
            r.worst_point = x;
        }
    }
    r.measured = lowest;
    r.worst_margin = scale > 0.0 ? lowest / scale : lowest;
    r.passed = r.worst_margin >= -r.tolerance;
    return r;
}

double solution_bound(SolutionBound which, const CoefficientSet& coeffs, double x, double e_x,
                      double beta)
{
    const double eps = coeffs.eps(x);
    const double layer = 1.0 + std::exp(-beta * e_x) / eps;
    switch (which) {
    case SolutionBound::U0:
        return 1.0;
    case SolutionBound::U1:
        return layer;
    case SolutionBound::U2:
        return (1.0 + coeffs.eps.deriv(x)) / eps * layer;
    }
    return kNaN;
}

double transformed_bound(int k, const CoefficientSet& coeffs, double x, double etilde_x)
{
    const double weight = std::exp(-0.5 * (coeffs.sigma + 2.0 * coeffs.beta) * etilde_x);
    const double lo = coeffs.eps_lower;
    const double hi = coeffs.eps_upper;
    const double eps = coeffs.eps(x);
    switch (k) {
    case 0:
        return 1.0 + weight;
    case 1:
        return std::sqrt(hi / eps) * (1.0 + weight / lo);
    case 2:
        return hi / eps * (1.0 + weight / (lo * lo)) +
               hi * coeffs.eps.deriv(x) / (2.0 * eps * eps) * (1.0 + weight / lo);
    default:
        throw Error(ErrorKind::Parameter, "transformed bounds exist for k = 0, 1, 2");
    }
}

double classical_bound(int k, double eps, double beta, double x)
{
    return 1.0 + std::pow(eps, -k) * std::exp(-beta / eps * x);
}

BoundCheckReport check_solution_bounds(const Scenario& scenario, const FemSolution& reference,
                                       SolutionBound which, double beta_scale)
{
    static constexpr std::array<const char*, 3> kLabels{"U0", "U1", "U2"};
    const int order = static_cast<int>(which);
    const auto e = layer_integral(scenario.coeffs, LayerIntegralKind::E);
    const double beta = scenario.coeffs.beta * beta_scale;
    std::string name = scenario.name + " " + kLabels[order] + " ratio";
    if (beta_scale != 1.0) name += " (beta x " + eps_label(beta_scale) + ")";
    return ratio_check(std::move(name), reference, order, [&](double x) {
        return solution_bound(which, scenario.coeffs, x, e(x), beta);
    });
}

BoundCheckReport check_transformed_bounds(const Scenario& scenario, const FemSolution& reference, int k)
{
    if (k < 0 || k > 2) throw Error(ErrorKind::Parameter, "transformed bounds exist for k = 0, 1, 2");
    const auto et = layer_integral(scenario.coeffs, LayerIntegralKind::ETilde);
    return ratio_check(scenario.name + " T" + std::to_string(k) + " ratio", reference, k,
                       [&](double x) { return transformed_bound(k, scenario.coeffs, x, et(x)); });
}

BoundCheckReport check_uniformity(const std::string& name, std::span<const BoundCheckReport> per_eps,
                                  double max_variation)
{
    BoundCheckReport r;
    r.name = name;
    r.sample_count = per_eps.size();
    r.tolerance = 0.0;
    double lo = kInf;
    double hi = 0.0;
    bool finite = !per_eps.empty();
    for (const auto& item : per_eps) {
        if (!item.passed || !std::isfinite(item.measured) || !(item.measured > 0.0)) finite = false;
        lo = std::min(lo, item.measured);
        if (item.measured >= hi) {
            hi = item.measured;
            r.worst_point = item.worst_point;
        }
    }
    r.measured = finite ? hi / lo : kInf;
    r.worst_margin = finite ? max_variation - r.measured : -kInf;
    r.passed = r.worst_margin >= -r.tolerance;
    return r;
}

FemSolution reference_solution(const Scenario& scenario, double h)
{
    const auto e = layer_integral(scenario.coeffs, LayerIntegralKind::E);
    return galerkin_solve(scenario, build_mesh(scenario.coeffs, e, h));
}

namespace {

constexpr std::array<double, 3> kSweepEps{1e-3, 1e-5, 1e-7};
constexpr int kLemmaTuples = 100;

void lemma_suite(std::vector<BoundCheckReport>& out, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    for (const auto& name : scenario_names()) {
        BoundCheckReport agg;
        agg.name = "integral lemma: " + name + " (" + std::to_string(kLemmaTuples) + " tuples)";
        agg.tolerance = kIntegralLemmaTolerance;
        agg.worst_margin = kInf;
        agg.measured = 0.0;  // violation count
        for (int i = 0; i < kLemmaTuples; ++i) {
            const double eps0 = std::pow(10.0, -7.0 + 5.0 * unit_draw(gen));
            double a = unit_draw(gen);
            double x = unit_draw(gen);
            if (a > x) std::swap(a, x);
            if (x - a < 1e-6) x = std::min(1.0, a + 1e-3);
            if (x - a < 1e-6) a = x - 1e-3;
            const int ell = static_cast<int>(gen() & 1U);
            const double gamma = 3.0 * (1.0 - unit_draw(gen));
            const auto r = check_integral_lemma(make_scenario(name, eps0).coeffs, a, x, ell, gamma);
            ++agg.sample_count;
            if (!r.passed) agg.measured += 1.0;
            if (r.worst_margin < agg.worst_margin) {
                agg.worst_margin = r.worst_margin;
                agg.worst_point = r.worst_point;
            }
        }
        agg.passed = agg.worst_margin >= -agg.tolerance;
        out.push_back(agg);
    }
    for (double eps0 : {1e-3, 1e-5}) {
        auto r = check_integral_lemma(make_scenario("eps-const", eps0).coeffs, 0.1, 0.6, 0, 1.0);
        r.name = "integral lemma equality: eps-const eps0=" + eps_label(eps0);
        r.measured = r.worst_margin;
        r.worst_margin = -std::abs(r.worst_margin);
        r.passed = r.worst_margin >= -r.tolerance;
        out.push_back(r);
    }
}

void barrier_suite(std::vector<BoundCheckReport>& out)
{
    for (const auto& name : scenario_names()) {
        for (double eps0 : kSweepEps) {
            const auto s = make_scenario(name, eps0);
            const auto e = layer_integral(s.coeffs, LayerIntegralKind::E);
            auto r = check_barrier_operator(s.coeffs, e, 1.0, 10'000);
            r.name = "barrier operator: " + name + " eps0=" + eps_label(eps0);
            out.push_back(r);
        }
    }
}

void bound_suite(std::vector<BoundCheckReport>& out)
{
    // The control passes when at least one scenario rejects the 2 beta bound.
    BoundCheckReport control;
    control.name = "negative control: U1 with 2 beta rejected by some scenario";
    control.worst_margin = -kInf;
    for (const auto& name : scenario_names()) {
        std::array<std::vector<BoundCheckReport>, 5> per_eps;
        for (double eps0 : kSweepEps) {
            const auto s = make_scenario(name, eps0);
            const auto ref = reference_solution(s);
            per_eps[0].push_back(check_solution_bounds(s, ref, SolutionBound::U0));
            per_eps[1].push_back(check_solution_bounds(s, ref, SolutionBound::U1));
            per_eps[2].push_back(check_transformed_bounds(s, ref, 0));
            per_eps[3].push_back(check_transformed_bounds(s, ref, 1));
            per_eps[4].push_back(check_solution_bounds(s, ref, SolutionBound::U1, 2.0));
        }
        out.push_back(check_uniformity("U0 uniform in eps0: " + name, per_eps[0]));
        out.push_back(check_uniformity("U1 uniform in eps0: " + name, per_eps[1]));
        out.push_back(check_uniformity("T0 uniform in eps0: " + name, per_eps[2]));
        out.push_back(check_uniformity("T1 uniform in eps0: " + name, per_eps[3]));

        const auto weakened = check_uniformity("", per_eps[4]);
        const double excess = weakened.measured - kUniformityFactor;
        control.sample_count += weakened.sample_count;
        if (excess > control.worst_margin) {
            control.worst_margin = excess;
            control.worst_point = weakened.worst_point;
            control.measured = weakened.measured;
        }
    }
    control.passed = control.worst_margin > control.tolerance;
    out.push_back(control);
}

}  // namespace

std::vector<BoundCheckReport> run_verification_suite(Suite suite, std::uint64_t seed)
{
    std::vector<BoundCheckReport> out;
    if (suite == Suite::Lemmas || suite == Suite::All) lemma_suite(out, seed);
    if (suite == Suite::Barriers || suite == Suite::All) barrier_suite(out);
    if (suite == Suite::Bounds || suite == Suite::All) bound_suite(out);
    return out;
}

}  // namespace cdlayer
