#include "cdlayer/problem.hpp"

#include "cdlayer/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cdlayer {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Evaluation: return "evaluation";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::DegenerateRegime: return "degenerate-regime";
    case ErrorKind::Resource: return "resource";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::Assembly: return "assembly";
    case ErrorKind::Shape: return "shape";
    }
    return "unknown";
}

ScalarFunction ScalarFunction::constant(double value)
{
    return {[value](double) { return value; }, [](double) { return 0.0; },
            [](double) { return 0.0; }};
}

ScalarFunction ScalarFunction::affine(double offset, double slope)
{
    return {[offset, slope](double x) { return offset + slope * x; },
            [slope](double) { return slope; }, [](double) { return 0.0; }};
}

// ---------------------------------------------------------------------------
// Validation

std::vector<AssumptionCheck> ValidationReport::violations() const
{
    std::vector<AssumptionCheck> out;
    for (const auto& c : checks) {
        if (c.severity == CheckSeverity::Required && !c.passed()) out.push_back(c);
    }
    return out;
}

std::vector<AssumptionCheck> ValidationReport::warnings() const
{
    std::vector<AssumptionCheck> out;
    for (const auto& c : checks) {
        if (c.severity == CheckSeverity::Advisory && !c.passed()) out.push_back(c);
    }
    return out;
}

bool ValidationReport::valid() const
{
    return violations().empty();
}

const AssumptionCheck* ValidationReport::find(std::string_view name) const
{
    auto it = std::find_if(checks.begin(), checks.end(),
                           [name](const AssumptionCheck& c) { return c.name == name; });
    return it == checks.end() ? nullptr : &*it;
}

namespace {

// Tracks min over samples of a slack expression; any non-finite sample turns
// the check into a NonFinite outcome.
class SampledCheck {
public:
    SampledCheck(std::string name, double tolerance, bool strict)
        : name_(std::move(name)), tolerance_(tolerance), strict_(strict)
    {
    }

    void add(double x, double slack)
    {
        if (!std::isfinite(slack)) {
            if (!non_finite_) worst_point_ = x;
            non_finite_ = true;
            return;
        }
        if (!non_finite_ && slack < margin_) {
            margin_ = slack;
            worst_point_ = x;
        }
    }

    [[nodiscard]] AssumptionCheck result(CheckSeverity severity = CheckSeverity::Required) const
    {
        AssumptionCheck out;
        out.name = name_;
        out.severity = severity;
        out.worst_point = worst_point_;
        if (non_finite_) {
            out.outcome = CheckOutcome::NonFinite;
            out.margin = std::numeric_limits<double>::quiet_NaN();
            return out;
        }
        out.margin = margin_;
        const bool ok = strict_ ? margin_ > 0.0 : margin_ >= -tolerance_;
        out.outcome = ok ? CheckOutcome::Passed : CheckOutcome::Violated;
        return out;
    }

private:
    std::string name_;
    double tolerance_;
    bool strict_;
    double margin_ = std::numeric_limits<double>::infinity();
    double worst_point_ = 0.0;
    bool non_finite_ = false;
};

AssumptionCheck scalar_check(std::string name, double margin, bool strict,
                             CheckSeverity severity = CheckSeverity::Required)
{
    SampledCheck check(std::move(name), 0.0, strict);
    check.add(0.0, margin);
    return check.result(severity);
}

}  // namespace

ValidationReport validate_coefficients(const CoefficientSet& coeffs, std::size_t sample_count)
{
    if (sample_count < 2) {
        throw Error(ErrorKind::Parameter, "validate_coefficients needs at least 2 samples");
    }
    if (!coeffs.eps.eval || !coeffs.eps.has_deriv() || !coeffs.b.eval || !coeffs.b.has_deriv() ||
        !coeffs.c.eval) {
        throw Error(ErrorKind::Configuration,
                    "validate_coefficients needs eps, eps', b, b' and c");
    }

    const double eps_tol = 1e-12 * std::max(std::abs(coeffs.eps_upper), 1e-300);
    const double gamma_tol = 1e-12 * std::max(1.0, std::abs(coeffs.gamma));

    SampledCheck b_above_beta("b > beta", 0.0, true);
    SampledCheck eps_above_lower("eps >= eps_lower", eps_tol, false);
    SampledCheck eps_below_upper("eps <= eps_upper", eps_tol, false);
    SampledCheck c_nonneg("c >= 0", 0.0, false);
    SampledCheck coercive("c + b'/2 >= gamma", gamma_tol, false);

    double min_eps_prime = std::numeric_limits<double>::infinity();
    double min_eps_prime_at = 0.0;
    bool eps_prime_finite = true;

    for (std::size_t k = 0; k < sample_count; ++k) {
        const double x = static_cast<double>(k) / static_cast<double>(sample_count - 1);
        const double eps = coeffs.eps(x);
        const double b = coeffs.b(x);
        const double db = coeffs.b.deriv(x);
        const double c = coeffs.c(x);
        const double deps = coeffs.eps.deriv(x);

        b_above_beta.add(x, b - coeffs.beta);
        eps_above_lower.add(x, eps - coeffs.eps_lower);
        eps_below_upper.add(x, coeffs.eps_upper - eps);
        c_nonneg.add(x, c);
        coercive.add(x, c + 0.5 * db - coeffs.gamma);

        if (!std::isfinite(deps)) {
            eps_prime_finite = false;
        } else if (deps < min_eps_prime) {
            min_eps_prime = deps;
            min_eps_prime_at = x;
        }
    }

    ValidationReport report;
    report.checks.push_back(scalar_check("beta > 0", coeffs.beta, true));
    report.checks.push_back(b_above_beta.result());
    report.checks.push_back(scalar_check("eps_lower > 0", coeffs.eps_lower, true));
    report.checks.push_back(eps_above_lower.result());
    report.checks.push_back(eps_below_upper.result());
    report.checks.push_back(c_nonneg.result());
    report.checks.push_back(scalar_check("gamma > 0", coeffs.gamma, true));
    report.checks.push_back(coercive.result());

    // sigma is author-supplied and must agree with the sampled minimum of eps'.
    constexpr double kSigmaTolerance = 1e-8;
    SampledCheck sigma_match("sigma == min eps'", kSigmaTolerance, false);
    sigma_match.add(min_eps_prime_at, eps_prime_finite
                                          ? -std::abs(coeffs.sigma - min_eps_prime)
                                          : std::numeric_limits<double>::quiet_NaN());
    report.checks.push_back(sigma_match.result());
    report.checks.push_back(scalar_check("sigma > -beta", coeffs.sigma + coeffs.beta, true));
    // Negative sigma is admissible, but the layer decomposition is only
    // established for nondecreasing eps.
    report.checks.push_back(scalar_check("sigma >= 0 (decomposition unproven otherwise)",
                                         coeffs.sigma, false, CheckSeverity::Advisory));
    return report;
}

ScalarFunction manufactured_rhs(const ScalarFunction& u, const CoefficientSet& coeffs)
{
    if (!u.eval || !u.has_deriv() || !u.has_deriv2()) {
        throw Error(ErrorKind::Configuration, "manufactured_rhs needs u, u' and u''");
    }
    if (!coeffs.eps.eval || !coeffs.eps.has_deriv()) {
        throw Error(ErrorKind::Configuration, "manufactured_rhs needs eps and eps'");
    }
    RealFunction f = [u, eps = coeffs.eps, b = coeffs.b, c = coeffs.c](double x) {
        return -eps(x) * u.deriv2(x) - (b(x) + eps.deriv(x)) * u.deriv(x) + c(x) * u(x);
    };
    return {std::move(f), {}, {}};
}

double derivative_consistency(const ScalarFunction& fn, std::size_t sample_count, double step)
{
    if (!fn.eval || !fn.has_deriv()) {
        throw Error(ErrorKind::Configuration, "derivative_consistency needs eval and deriv");
    }
    if (sample_count < 1) return 0.0;

    std::vector<double> xs(sample_count);
    std::vector<double> exact(sample_count);
    std::vector<double> fd(sample_count);
    double scale = 0.0;
    for (std::size_t k = 0; k < sample_count; ++k) {
        // interior points so that x +- step stays inside [0,1]
        xs[k] = step + (1.0 - 2.0 * step) * (static_cast<double>(k) + 0.5) /
                           static_cast<double>(sample_count);
        exact[k] = fn.deriv(xs[k]);
        fd[k] = (fn(xs[k] + step) - fn(xs[k] - step)) / (2.0 * step);
        scale = std::max(scale, std::abs(exact[k]));
    }
    if (scale == 0.0) scale = 1.0;

    double worst = 0.0;
    for (std::size_t k = 0; k < sample_count; ++k) {
        const double denom = std::max(std::abs(exact[k]), 1e-3 * scale);
        worst = std::max(worst, std::abs(fd[k] - exact[k]) / denom);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Scenario catalog

namespace {

constexpr double kPi = std::numbers::pi;

ScalarFunction smooth_exemplar()
{
    return {[](double x) { return std::cos(0.5 * kPi * x); },
            [](double x) { return -0.5 * kPi * std::sin(0.5 * kPi * x); },
            [](double x) { return -0.25 * kPi * kPi * std::cos(0.5 * kPi * x); }};
}

// (exp(-beta e(x)) - exp(-beta e(1))) / (1 - exp(-beta e(1))) for a
// closed-form layer integral e with e' = 1/eps.
ScalarFunction layer_exemplar(RealFunction layer_integral, ScalarFunction eps, double beta)
{
    const double tail = std::exp(-beta * layer_integral(1.0));
    const double scale = 1.0 / (1.0 - tail);
    auto g = [layer_integral, beta](double x) { return std::exp(-beta * layer_integral(x)); };
    return {[g, tail, scale](double x) { return (g(x) - tail) * scale; },
            [g, eps, beta, scale](double x) { return -beta * g(x) / eps(x) * scale; },
            [g, eps, beta, scale](double x) {
                const double e = eps(x);
                return beta * (beta + eps.deriv(x)) * g(x) / (e * e) * scale;
            }};
}

// Exact solution of -eps u'' - b u' + c u = f with constant data and
// homogeneous Dirichlet conditions.
ScalarFunction constant_coefficient_solution(double eps, double b, double c, double f)
{
    const double disc = std::sqrt(b * b + 4.0 * eps * c);
    const double r_layer = (-b - disc) / (2.0 * eps);
    const double r_smooth = 2.0 * c / (b + disc);
    const double k = f / c;
    // u = k + A exp(r_layer x) + B exp(r_smooth (x - 1))
    const double a = -k * (-std::expm1(-r_smooth)) / (1.0 - std::exp(r_layer - r_smooth));
    const double bb = -k - a * std::exp(r_layer);
    return {[=](double x) {
                return k + a * std::exp(r_layer * x) + bb * std::exp(r_smooth * (x - 1.0));
            },
            [=](double x) {
                return a * r_layer * std::exp(r_layer * x) +
                       bb * r_smooth * std::exp(r_smooth * (x - 1.0));
            },
            [=](double x) {
                return a * r_layer * r_layer * std::exp(r_layer * x) +
                       bb * r_smooth * r_smooth * std::exp(r_smooth * (x - 1.0));
            }};
}

ScalarFunction difference(const ScalarFunction& p, const ScalarFunction& q)
{
    return {[p, q](double x) { return p(x) - q(x); },
            [p, q](double x) { return p.deriv(x) - q.deriv(x); },
            [p, q](double x) { return p.deriv2(x) - q.deriv2(x); }};
}

void check_eps0(double eps0)
{
    if (!(eps0 > 0.0 && eps0 <= 0.1)) {
        throw Error(ErrorKind::Parameter, "eps0 must lie in (0, 0.1]");
    }
}

Scenario eps_const(double eps0)
{
    Scenario s;
    s.name = "eps-const";
    auto& k = s.coeffs;
    k.eps = ScalarFunction::constant(eps0);
    k.b = ScalarFunction::constant(2.0);
    k.c = ScalarFunction::constant(1.0);
    k.f = ScalarFunction::constant(1.0);
    k.beta = 1.0;
    k.gamma = 1.0;
    k.eps_lower = eps0;
    k.eps_upper = eps0;
    k.sigma = 0.0;
    s.exact = constant_coefficient_solution(eps0, 2.0, 1.0, 1.0);
    s.rhs_provenance = RhsProvenance::Given;
    s.exemplars = Exemplars{smooth_exemplar(),
                            layer_exemplar([eps0](double x) { return x / eps0; }, k.eps, k.beta)};
    return s;
}

Scenario eps_linear(double eps0)
{
    Scenario s;
    s.name = "eps-linear";
    auto& k = s.coeffs;
    k.eps = ScalarFunction::affine(eps0, eps0);
    k.b = ScalarFunction::constant(2.0);
    k.c = ScalarFunction::constant(1.0);
    k.f = ScalarFunction::constant(1.0);
    k.beta = 1.0;
    k.gamma = 1.0;
    k.eps_lower = eps0;
    k.eps_upper = 2.0 * eps0;
    k.sigma = eps0;
    s.rhs_provenance = RhsProvenance::Given;
    s.exemplars = Exemplars{
        smooth_exemplar(),
        layer_exemplar([eps0](double x) { return std::log1p(x) / eps0; }, k.eps, k.beta)};
    return s;
}

Scenario eps_exp(double eps0)
{
    Scenario s;
    s.name = "eps-exp";
    auto& k = s.coeffs;
    k.eps = {[eps0](double x) { return eps0 * std::exp(x); },
             [eps0](double x) { return eps0 * std::exp(x); },
             [eps0](double x) { return eps0 * std::exp(x); }};
    k.b = ScalarFunction::affine(2.0, 1.0);
    k.c = ScalarFunction::constant(1.0);
    k.f = ScalarFunction::affine(1.0, 1.0);
    k.beta = 1.0;
    k.gamma = 1.5;
    k.eps_lower = eps0;
    k.eps_upper = eps0 * std::exp(1.0);
    k.sigma = eps0;
    s.rhs_provenance = RhsProvenance::Given;
    s.exemplars = Exemplars{
        smooth_exemplar(),
        layer_exemplar([eps0](double x) { return -std::expm1(-x) / eps0; }, k.eps, k.beta)};
    return s;
}

// eps = eps0 (1+x)^2, exact u = cos(pi x / 2) - E_ex(x). Both pieces take the
// value 1 at x = 0 and 0 at x = 1, so u satisfies the boundary conditions
// without a further correction.
Scenario manufactured(double eps0)
{
    Scenario s;
    s.name = "manufactured";
    auto& k = s.coeffs;
    k.eps = {[eps0](double x) { return eps0 * (1.0 + x) * (1.0 + x); },
             [eps0](double x) { return 2.0 * eps0 * (1.0 + x); },
             [eps0](double) { return 2.0 * eps0; }};
    k.b = ScalarFunction::constant(2.0);
    k.c = ScalarFunction::constant(1.0);
    k.beta = 1.0;
    k.gamma = 1.0;
    k.eps_lower = eps0;
    k.eps_upper = 4.0 * eps0;
    k.sigma = 2.0 * eps0;
    auto layer = layer_exemplar([eps0](double x) { return x / (eps0 * (1.0 + x)); }, k.eps,
                                k.beta);
    auto smooth = smooth_exemplar();
    s.exact = difference(smooth, layer);
    k.f = manufactured_rhs(*s.exact, k);
    s.rhs_provenance = RhsProvenance::Manufactured;
    s.exemplars = Exemplars{smooth, layer};
    return s;
}

}  // namespace

const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names{"eps-const", "eps-linear", "eps-exp",
                                                "manufactured"};
    return names;
}

Scenario make_scenario(std::string_view name, double eps0)
{
    check_eps0(eps0);
    if (name == "eps-const") return eps_const(eps0);
    if (name == "eps-linear") return eps_linear(eps0);
    if (name == "eps-exp") return eps_exp(eps0);
    if (name == "manufactured") return manufactured(eps0);
    throw Error(ErrorKind::Parameter, "unknown scenario '" + std::string(name) + "'");
}

std::vector<Scenario> builtin_scenarios(double eps0)
{
    std::vector<Scenario> out;
    for (const auto& name : scenario_names()) out.push_back(make_scenario(name, eps0));
    return out;
}

ScenarioFamily scenario_family(std::string_view name)
{
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw Error(ErrorKind::Parameter, "unknown scenario '" + std::string(name) + "'");
    }
    return [n = std::string(name)](double eps0) { return make_scenario(n, eps0); };
}

}  // namespace cdlayer
