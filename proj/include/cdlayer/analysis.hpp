#pragma once

#include "cdlayer/fem.hpp"
#include "cdlayer/mesh.hpp"
#include "cdlayer/problem.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cdlayer {

/// Nodal interpolant of f; boundary values are f(0) and f(1).
FemSolution interpolate(const RealFunction& f, const LayerMesh& mesh);

/// ||v||_eps = sqrt(||eps^{1/2} v'||_0^2 + ||v||_0^2) for a finite element
/// function, integrated element by element.
double energy_norm(const FemSolution& v, const CoefficientSet& coeffs, int quad_points = 5);

/// Same norm for a closed-form function; uses adaptive quadrature with panels
/// graded toward x = 0.
double energy_norm(const ScalarFunction& v, const CoefficientSet& coeffs, double rel_tol = 1e-10);

enum class ReferenceKind { ClosedForm, FineMesh };

struct ErrorReport {
    double h = 0.0;
    std::size_t node_count = 0;
    double energy_error = 0.0;
    double l2_error = 0.0;
    double weighted_grad_error = 0.0;  ///< ||eps^{1/2}(u - u_h)'||_0
    ReferenceKind reference_kind = ReferenceKind::ClosedForm;
};

inline constexpr int kErrorQuadPoints = 7;
inline constexpr std::size_t kReferenceDensityFactor = 8;

/// Error against the scenario's closed-form exact solution.
ErrorReport error_report(const FemSolution& sol, const Scenario& scenario);

/// Error against a reference solution with at least kReferenceDensityFactor
/// times as many nodes.
ErrorReport error_report(const FemSolution& sol, const Scenario& scenario, const FemSolution& reference);

/// Error norms of v - w for two piecewise-linear functions, integrated on the
/// union of their node sets.
ErrorReport compare_solutions(const FemSolution& v, const FemSolution& w, const CoefficientSet& coeffs);

struct ConvergenceRow {
    double eps0 = 0.0;
    double h = 0.0;
    std::optional<ErrorReport> report;  ///< empty for skipped cells
    std::string skip_reason;
    /// log(err_prev / err) / log(h_prev / h) against the previous row with
    /// the same eps0; NaN where undefined.
    double rate = 0.0;
    /// Same rate for the L2 part.
    double l2_rate = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;  ///< sorted by eps0 ascending, then h descending

    /// Rates of the rows with the given eps0, in row order (first entry skipped).
    [[nodiscard]] std::vector<double> rates_for(double eps0) const;
};

struct StudyOptions {
    double delta = 1.0;
    /// Reference meshes for scenarios without a closed form use h / this.
    double reference_refinement = 16.0;
};

/// Full (eps0, h) sweep: Galerkin solve on the layer-adapted mesh and an
/// error report per cell. Cells whose mesh cannot be built are kept with a
/// skip reason.
ConvergenceTable convergence_study(const ScenarioFamily& family, std::span<const double> h_list,
                                   std::span<const double> eps0_list, const StudyOptions& options = {});

struct InterpolationRow {
    double h = 0.0;
    std::size_t node_count = 0;
    double tau = 0.0;
    double smooth_l2 = 0.0;             ///< ||S - S^I||_0
    double smooth_h1_semi = 0.0;        ///< |S - S^I|_1
    double layer_l2_coarse = 0.0;       ///< ||E - E^I||_{0,[tau,1]}
    double layer_max_coarse = 0.0;      ///< ||E - E^I||_{inf,[tau,1]} (sampled)
    double layer_weighted_l2_fine = 0.0;    ///< ||eps^{-1/2}(E - E^I)||_{0,[0,tau]}
    double layer_weighted_grad_fine = 0.0;  ///< ||eps^{1/2}(E - E^I)'||_{0,[0,tau]}
};

struct InterpolationTable {
    std::vector<InterpolationRow> rows;  ///< in h_list order

    /// log(q_prev / q) / log(h_prev / h) for consecutive rows of the selected column.
    [[nodiscard]] std::vector<double> rates(double InterpolationRow::*column) const;
};

InterpolationTable interpolation_study(const Scenario& scenario, std::span<const double> h_list,
                                       double delta = 1.0);

/// log(err_a / err_b) / log(h_a / h_b).
double observed_rate(double h_a, double err_a, double h_b, double err_b);

}  // namespace cdlayer
