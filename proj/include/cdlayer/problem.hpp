#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cdlayer {

using RealFunction = std::function<double(double)>;

/// A real function on [0,1] with its first derivative and, optionally, the
/// second derivative. An empty `deriv2` means "not available in closed form".
struct ScalarFunction {
    RealFunction eval;
    RealFunction deriv;
    RealFunction deriv2;

    double operator()(double x) const { return eval(x); }
    [[nodiscard]] bool has_deriv() const noexcept { return static_cast<bool>(deriv); }
    [[nodiscard]] bool has_deriv2() const noexcept { return static_cast<bool>(deriv2); }

    static ScalarFunction constant(double value);
    /// offset + slope * x
    static ScalarFunction affine(double offset, double slope);
};

/// Coefficients of  -(eps u')' - b u' + c u = f  on (0,1), u(0) = u(1) = 0,
/// together with the structural constants the analysis relies on.
struct CoefficientSet {
    ScalarFunction eps;
    ScalarFunction b;
    ScalarFunction c;
    ScalarFunction f;
    double beta = 0.0;       ///< 0 < beta < b(x)
    double gamma = 0.0;      ///< c + b'/2 >= gamma > 0
    double eps_lower = 0.0;  ///< min eps
    double eps_upper = 0.0;  ///< max eps
    double sigma = 0.0;      ///< min eps'
};

enum class RhsProvenance { Given, Manufactured };

/// Closed-form reference pieces used by the interpolation studies: a smooth
/// function with bounded derivatives and a layer function decaying like
/// exp(-beta e(x)).
struct Exemplars {
    ScalarFunction smooth;
    ScalarFunction layer;
};

struct Scenario {
    std::string name;
    CoefficientSet coeffs;
    std::optional<ScalarFunction> exact;
    RhsProvenance rhs_provenance = RhsProvenance::Given;
    std::optional<Exemplars> exemplars;
};

enum class CheckOutcome { Passed, Violated, NonFinite };

/// Advisory checks are reported but do not invalidate a coefficient set.
enum class CheckSeverity { Required, Advisory };

struct AssumptionCheck {
    std::string name;
    CheckSeverity severity = CheckSeverity::Required;
    CheckOutcome outcome = CheckOutcome::Passed;
    double margin = 0.0;       ///< smallest (lhs - rhs) slack over the samples
    double worst_point = 0.0;  ///< sample where the margin was attained
    [[nodiscard]] bool passed() const noexcept { return outcome == CheckOutcome::Passed; }
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;

    /// Required checks that did not pass.
    [[nodiscard]] std::vector<AssumptionCheck> violations() const;
    /// Advisory checks that did not pass.
    [[nodiscard]] std::vector<AssumptionCheck> warnings() const;
    [[nodiscard]] bool valid() const;
    [[nodiscard]] const AssumptionCheck* find(std::string_view name) const;
};

inline constexpr std::size_t kDefaultValidationSamples = 10'001;

/// Evaluates every standing assumption on an equispaced grid of
/// `sample_count` points in [0,1].
ValidationReport validate_coefficients(const CoefficientSet& coeffs,
                                       std::size_t sample_count = kDefaultValidationSamples);

/// f = -eps u'' - (b + eps') u' + c u, evaluated pointwise from closed forms.
ScalarFunction manufactured_rhs(const ScalarFunction& u, const CoefficientSet& coeffs);

/// Largest relative disagreement between `fn.deriv` and a central difference of
/// `fn.eval` with step `step` over `sample_count` equispaced interior points.
double derivative_consistency(const ScalarFunction& fn, std::size_t sample_count = 101,
                              double step = 1e-6);

/// Names accepted by make_scenario, in catalog order.
const std::vector<std::string>& scenario_names();

/// Builds one catalog scenario. Throws Error(Parameter) for an unknown name or
/// eps0 outside (0, 0.1].
Scenario make_scenario(std::string_view name, double eps0);

/// The full catalog for one value of eps0.
std::vector<Scenario> builtin_scenarios(double eps0);

using ScenarioFamily = std::function<Scenario(double eps0)>;

ScenarioFamily scenario_family(std::string_view name);

}  // namespace cdlayer
