#pragma once

#include "cdlayer/mesh.hpp"
#include "cdlayer/problem.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cdlayer {

/// n x n tridiagonal system; sub[i] couples row i+1 to column i, sup[i]
/// couples row i to column i+1.
struct TridiagonalSystem {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> sup;
    std::vector<double> rhs;

    [[nodiscard]] std::size_t size() const noexcept { return diag.size(); }
    /// (A x)_i
    [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
};

inline constexpr int kAssemblyQuadPoints = 5;

/// Galerkin matrix a(phi_j, phi_i) and load (f, phi_i) for the interior hat
/// functions of `mesh`, where
///   a(v,w) = (eps v', w') - (b v', w) + (c v, w).
/// Matrix entries use the fixed per-element rule; the load uses adaptive
/// quadrature on each element.
TridiagonalSystem assemble(const Scenario& scenario, const LayerMesh& mesh,
                           int quad_points_per_element = kAssemblyQuadPoints);

/// Thomas elimination; switches to Gaussian elimination with partial pivoting
/// on the band when a pivot falls below 1e-300 in magnitude.
std::vector<double> solve_tridiagonal(const TridiagonalSystem& system);

/// Partially pivoted elimination restricted to the band (one extra
/// superdiagonal of fill). Throws Error(Singular) on a zero pivot column.
std::vector<double> solve_tridiagonal_pivoted(const TridiagonalSystem& system);

/// Continuous piecewise-linear function on a mesh.
class FemSolution {
public:
    FemSolution(LayerMesh mesh, std::vector<double> coefficients);

    [[nodiscard]] const LayerMesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] std::span<const double> coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] std::span<const double> nodes() const noexcept { return mesh_.nodes; }

    double operator()(double x) const;
    /// Slope on the element containing x (right-continuous, left slope at x = 1).
    [[nodiscard]] double derivative(double x) const;
    /// Slope on element k = [x_k, x_{k+1}].
    [[nodiscard]] double slope(std::size_t k) const;
    /// Index of the element containing x.
    [[nodiscard]] std::size_t locate(double x) const;

private:
    LayerMesh mesh_;
    std::vector<double> coefficients_;
};

FemSolution galerkin_solve(const Scenario& scenario, const LayerMesh& mesh,
                           int quad_points_per_element = kAssemblyQuadPoints);

/// a(v,w) by per-element Gauss quadrature. Throws Error(Shape) if v and w
/// live on different meshes.
double bilinear_form(const FemSolution& v, const FemSolution& w, const Scenario& scenario,
                     int quad_points_per_element = kAssemblyQuadPoints);

}  // namespace cdlayer
