#pragma once

#include "cdlayer/calculus.hpp"
#include "cdlayer/problem.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace cdlayer {

enum class MeshRegion { Graded, Coarse };

/// Graded-then-equidistant mesh of [0,1]:
///   x_0 = 0, x_1 = h delta eps_lower, x_{i+1} = (1+h) x_i  for 1 <= i <= n_star,
/// where tau = x_{n_star+1} is the first graded node >= tau_star, followed by
/// equal subintervals of [tau, 1] of size <= h.
struct LayerMesh {
    std::vector<double> nodes;
    double h = 0.0;
    double delta = 0.0;
    std::size_t n_star = 0;
    std::size_t tau_index = 0;
    double tau_star = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
    [[nodiscard]] std::size_t element_count() const noexcept { return nodes.size() - 1; }
    [[nodiscard]] double tau() const { return nodes.at(tau_index); }
    /// Nodes up to and including tau belong to the graded part.
    [[nodiscard]] MeshRegion region(std::size_t i) const noexcept
    {
        return i <= tau_index ? MeshRegion::Graded : MeshRegion::Coarse;
    }
};

inline constexpr std::size_t kDefaultNodeCap = 10'000'000;

/// Root of e(tau_star) = -(2/beta) ln h. Throws Error(Parameter) unless
/// 0 < h < 1 and Error(DegenerateRegime) when the root lies beyond 1/2 or
/// beyond the domain.
double compute_tau_star(const CoefficientSet& coeffs, const CumulativeIntegral& e, double h);

LayerMesh build_mesh(const CoefficientSet& coeffs, const CumulativeIntegral& e, double h,
                     double delta = 1.0, std::size_t node_cap = kDefaultNodeCap);

/// (ln(eps_upper/eps_lower) + ln(-ln h / h)) / h, the node count predicted up
/// to a constant factor.
double predict_cardinality(const CoefficientSet& coeffs, double h);

/// Equidistant mesh with `elements` elements; it has no graded part
/// (n_star = tau_index = 0) and serves as a comparison baseline.
LayerMesh uniform_mesh(std::size_t elements);

/// Structural invariants of a built mesh; returns one message per violation.
std::vector<std::string> check_mesh_invariants(const LayerMesh& mesh, const CoefficientSet& coeffs);

}  // namespace cdlayer
