#include "cdlayer/analysis.hpp"

#include "cdlayer/calculus.hpp"
#include "cdlayer/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cdlayer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Accumulates int (u - u_h)^2 and int eps ((u - u_h)')^2 over [lo, hi].
struct SquaredErrors {
    double l2 = 0.0;
    double grad = 0.0;
};

template <typename Diff, typename DiffPrime>
void accumulate_element(SquaredErrors& acc, const ScalarFunction& eps, double lo, double hi,
                        Diff&& diff, DiffPrime&& diff_prime, int quad_points)
{
    const auto& rule = gauss_legendre(quad_points);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (std::size_t g = 0; g < rule.size(); ++g) {
        const double t = mid + half * rule.points[g];
        const double w = half * rule.weights[g];
        const double d = diff(t);
        const double dp = diff_prime(t);
        acc.l2 += w * d * d;
        acc.grad += w * eps(t) * dp * dp;
    }
}

ErrorReport finish(const SquaredErrors& acc, double h, std::size_t nodes, ReferenceKind kind)
{
    ErrorReport r;
    r.h = h;
    r.node_count = nodes;
    r.l2_error = std::sqrt(acc.l2);
    r.weighted_grad_error = std::sqrt(acc.grad);
    r.energy_error = std::sqrt(acc.l2 + acc.grad);
    r.reference_kind = kind;
    return r;
}

}  // namespace

FemSolution interpolate(const RealFunction& f, const LayerMesh& mesh)
{
    std::vector<double> values(mesh.nodes.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = f(mesh.nodes[i]);
        if (!std::isfinite(values[i])) {
            throw Error(ErrorKind::Evaluation, "non-finite value while interpolating at node " +
                                                   std::to_string(i));
        }
    }
    return FemSolution(mesh, std::move(values));
}

double energy_norm(const FemSolution& v, const CoefficientSet& coeffs, int quad_points)
{
    SquaredErrors acc;
    const auto nodes = v.nodes();
    const auto values = v.coefficients();
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double lo = nodes[k];
        const double slope = v.slope(k);
        const double v0 = values[k];
        accumulate_element(
            acc, coeffs.eps, lo, nodes[k + 1], [&](double t) { return v0 + slope * (t - lo); },
            [&](double) { return slope; }, quad_points);
    }
    return std::sqrt(acc.l2 + acc.grad);
}

double energy_norm(const ScalarFunction& v, const CoefficientSet& coeffs, double rel_tol)
{
    if (!v.has_deriv()) throw Error(ErrorKind::Configuration, "energy_norm needs v'");
    const auto breaks = graded_breakpoints(0.0, 1.0, 0.0);
    IntegrationOptions opts;
    opts.breakpoints = breaks;
    const auto& eps = coeffs.eps;
    const double grad = integrate(
        [&](double t) {
            const double d = v.deriv(t);
            return eps(t) * d * d;
        },
        0.0, 1.0, rel_tol, opts);
    const double l2 = integrate(
        [&](double t) {
            const double d = v(t);
            return d * d;
        },
        0.0, 1.0, rel_tol, opts);
    return std::sqrt(grad + l2);
}

ErrorReport error_report(const FemSolution& sol, const Scenario& scenario)
{
    if (!scenario.exact) {
        throw Error(ErrorKind::Configuration,
                    "scenario '" + scenario.name + "' has no closed-form solution; supply a reference");
    }
    const auto& u = *scenario.exact;
    SquaredErrors acc;
    const auto nodes = sol.nodes();
    const auto values = sol.coefficients();
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double lo = nodes[k];
        const double slope = sol.slope(k);
        const double v0 = values[k];
        accumulate_element(
            acc, scenario.coeffs.eps, lo, nodes[k + 1],
            [&](double t) { return u(t) - (v0 + slope * (t - lo)); },
            [&](double t) { return u.deriv(t) - slope; }, kErrorQuadPoints);
    }
    return finish(acc, sol.mesh().h, nodes.size(), ReferenceKind::ClosedForm);
}

ErrorReport compare_solutions(const FemSolution& v, const FemSolution& w, const CoefficientSet& coeffs)
{
    std::vector<double> merged;
    merged.reserve(v.nodes().size() + w.nodes().size());
    std::merge(v.nodes().begin(), v.nodes().end(), w.nodes().begin(), w.nodes().end(),
               std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    SquaredErrors acc;
    for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
        const double lo = merged[k];
        const double hi = merged[k + 1];
        const double mid = 0.5 * (lo + hi);
        const std::size_t kv = v.locate(mid);
        const std::size_t kw = w.locate(mid);
        const double sv = v.slope(kv);
        const double sw = w.slope(kw);
        const double at_lo = v(lo) - w(lo);
        accumulate_element(
            acc, coeffs.eps, lo, hi, [&](double t) { return at_lo + (sv - sw) * (t - lo); },
            [&](double) { return sv - sw; }, kErrorQuadPoints);
    }
    return finish(acc, v.mesh().h, v.nodes().size(), ReferenceKind::FineMesh);
}

ErrorReport error_report(const FemSolution& sol, const Scenario& scenario, const FemSolution& reference)
{
    if (reference.nodes().size() < kReferenceDensityFactor * sol.nodes().size()) {
        throw Error(ErrorKind::Configuration, "reference solution is not sufficiently finer (needs " +
                                                  std::to_string(kReferenceDensityFactor) +
                                                  "x the node count)");
    }
    return compare_solutions(sol, reference, scenario.coeffs);
}

double observed_rate(double h_a, double err_a, double h_b, double err_b)
{
    if (!(err_a > 0.0 && err_b > 0.0 && h_a > 0.0 && h_b > 0.0) || h_a == h_b) return kNaN;
    return std::log(err_a / err_b) / std::log(h_a / h_b);
}

std::vector<double> ConvergenceTable::rates_for(double eps0) const
{
    std::vector<double> out;
    bool first = true;
    for (const auto& row : rows) {
        if (row.eps0 != eps0) continue;
        if (!first) out.push_back(row.rate);
        first = false;
    }
    return out;
}

ConvergenceTable convergence_study(const ScenarioFamily& family, std::span<const double> h_list,
                                   std::span<const double> eps0_list, const StudyOptions& options)
{
    std::vector<double> eps_sorted(eps0_list.begin(), eps0_list.end());
    std::sort(eps_sorted.begin(), eps_sorted.end());
    eps_sorted.erase(std::unique(eps_sorted.begin(), eps_sorted.end()), eps_sorted.end());
    std::vector<double> h_sorted(h_list.begin(), h_list.end());
    std::sort(h_sorted.begin(), h_sorted.end(), std::greater<>());
    h_sorted.erase(std::unique(h_sorted.begin(), h_sorted.end()), h_sorted.end());

    ConvergenceTable table;
    for (double eps0 : eps_sorted) {
        const Scenario scenario = family(eps0);
        const CumulativeIntegral e = layer_integral(scenario.coeffs, LayerIntegralKind::E);
        const ConvergenceRow* prev = nullptr;
        const std::size_t group_start = table.rows.size();
        for (double h : h_sorted) {
            ConvergenceRow row;
            row.eps0 = eps0;
            row.h = h;
            row.rate = kNaN;
            row.l2_rate = kNaN;
            try {
                const LayerMesh mesh = build_mesh(scenario.coeffs, e, h, options.delta);
                const FemSolution sol = galerkin_solve(scenario, mesh);
                if (scenario.exact) {
                    row.report = error_report(sol, scenario);
                } else {
                    const LayerMesh fine = build_mesh(scenario.coeffs, e,
                                                      h / options.reference_refinement, options.delta);
                    row.report = error_report(sol, scenario, galerkin_solve(scenario, fine));
                }
            } catch (const Error& err) {
                if (err.kind() != ErrorKind::DegenerateRegime && err.kind() != ErrorKind::Resource &&
                    err.kind() != ErrorKind::Configuration) {
                    throw;
                }
                row.skip_reason = err.what();
            }
            table.rows.push_back(std::move(row));
        }
        for (std::size_t i = group_start; i < table.rows.size(); ++i) {
            auto& row = table.rows[i];
            if (prev && prev->report && row.report) {
                row.rate = observed_rate(prev->h, prev->report->energy_error, row.h,
                                         row.report->energy_error);
                row.l2_rate =
                    observed_rate(prev->h, prev->report->l2_error, row.h, row.report->l2_error);
            }
            prev = &row;
        }
    }
    return table;
}

std::vector<double> InterpolationTable::rates(double InterpolationRow::*column) const
{
    std::vector<double> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        out.push_back(observed_rate(rows[i - 1].h, rows[i - 1].*column, rows[i].h, rows[i].*column));
    }
    return out;
}

InterpolationTable interpolation_study(const Scenario& scenario, std::span<const double> h_list,
                                       double delta)
{
    if (!scenario.exemplars) {
        throw Error(ErrorKind::Configuration,
                    "scenario '" + scenario.name + "' provides no smooth/layer exemplars");
    }
    const auto& smooth = scenario.exemplars->smooth;
    const auto& layer = scenario.exemplars->layer;
    const auto& eps = scenario.coeffs.eps;
    const CumulativeIntegral e = layer_integral(scenario.coeffs, LayerIntegralKind::E);

    InterpolationTable table;
    for (double h : h_list) {
        const LayerMesh mesh = build_mesh(scenario.coeffs, e, h, delta);
        const FemSolution s_int = interpolate(smooth.eval, mesh);
        const FemSolution e_int = interpolate(layer.eval, mesh);
        const auto& x = mesh.nodes;

        SquaredErrors s_acc;
        SquaredErrors coarse_acc;
        double fine_weighted_l2 = 0.0;
        double fine_weighted_grad = 0.0;
        double coarse_max = 0.0;
        const auto& rule = gauss_legendre(kErrorQuadPoints);
        for (std::size_t k = 0; k + 1 < x.size(); ++k) {
            const double lo = x[k];
            const double hi = x[k + 1];
            const double ss = s_int.slope(k);
            const double s0 = s_int.coefficients()[k];
            const double es = e_int.slope(k);
            const double e0 = e_int.coefficients()[k];
            const double half = 0.5 * (hi - lo);
            const double mid = 0.5 * (hi + lo);
            const bool fine = k < mesh.tau_index;
            for (std::size_t g = 0; g < rule.size(); ++g) {
                const double t = mid + half * rule.points[g];
                const double w = half * rule.weights[g];
                const double ds = smooth(t) - (s0 + ss * (t - lo));
                const double dsp = smooth.deriv(t) - ss;
                s_acc.l2 += w * ds * ds;
                s_acc.grad += w * dsp * dsp;
                const double de = layer(t) - (e0 + es * (t - lo));
                if (fine) {
                    const double dep = layer.deriv(t) - es;
                    const double ept = eps(t);
                    fine_weighted_l2 += w * de * de / ept;
                    fine_weighted_grad += w * ept * dep * dep;
                } else {
                    coarse_acc.l2 += w * de * de;
                }
            }
            if (!fine) {
                constexpr int kSamples = 16;
                for (int j = 0; j <= kSamples; ++j) {
                    const double t = lo + (hi - lo) * j / kSamples;
                    coarse_max = std::max(coarse_max, std::abs(layer(t) - (e0 + es * (t - lo))));
                }
            }
        }

        InterpolationRow row;
        row.h = h;
        row.node_count = x.size();
        row.tau = mesh.tau();
        row.smooth_l2 = std::sqrt(s_acc.l2);
        row.smooth_h1_semi = std::sqrt(s_acc.grad);
        row.layer_l2_coarse = std::sqrt(coarse_acc.l2);
        row.layer_max_coarse = coarse_max;
        row.layer_weighted_l2_fine = std::sqrt(fine_weighted_l2);
        row.layer_weighted_grad_fine = std::sqrt(fine_weighted_grad);
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace cdlayer
