#pragma once

#include "cdlayer/calculus.hpp"
#include "cdlayer/fem.hpp"
#include "cdlayer/problem.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cdlayer {

/// Outcome of one numerical inequality check. `passed` holds exactly when
/// worst_margin >= -tolerance.
struct BoundCheckReport {
    std::string name;
    std::size_t sample_count = 0;
    double worst_margin = 0.0;
    double worst_point = 0.0;
    double tolerance = 0.0;
    /// Check-specific headline value (sup-ratio, variation factor, ...); NaN if unused.
    double measured = 0.0;
    bool passed = false;
};

inline constexpr double kIntegralLemmaTolerance = 1e-8;

/// Compares
///   L = int_a^x eps^ell exp(gamma e_a(t)) dt
///   R = (eps(x)^{ell+1} exp(gamma e_a(x)) - eps(a)^{ell+1}) / (gamma + (ell+1) sigma0)
/// with sigma0 the sampled minimum of eps' on [a,x]. worst_margin is (R - L)/|R|.
/// Throws Error(Parameter) unless 0 <= a < x <= 1, sigma0 >= 0 and
/// gamma > -(ell+1) sigma0.
BoundCheckReport check_integral_lemma(const CoefficientSet& coeffs, double a, double x, int ell,
                                      double gamma);

/// Closed form of L phi for phi = amplitude exp(-beta e):
///   amplitude (beta (b - beta)/eps + c) exp(-beta e).
double barrier_operator(const CoefficientSet& coeffs, double amplitude, double x, double e_x);

/// The same quantity before cancellation,
///   -eps phi'' - (b + eps') phi' + c phi.
double barrier_operator_expanded(const CoefficientSet& coeffs, double amplitude, double x, double e_x);

/// Minimum of barrier_operator over sample_count equispaced points, relative to
/// amplitude * max(beta |b - beta|/eps + |c|).
BoundCheckReport check_barrier_operator(const CoefficientSet& coeffs, const CumulativeIntegral& e,
                                        double amplitude, std::size_t sample_count);

enum class SolutionBound { U0, U1, U2 };

/// Right-hand sides with C = 1, in terms of e(x) = int_0^x 1/eps:
///   U0: 1
///   U1: 1 + exp(-beta e)/eps
///   U2: (1 + eps')/eps * (1 + exp(-beta e)/eps)
double solution_bound(SolutionBound which, const CoefficientSet& coeffs, double x, double e_x,
                      double beta);

/// Right-hand sides of order k = 0, 1, 2 in terms of the transformed integral
/// et(x) = int_0^x 1/sqrt(eps_upper eps), with weight exp(-(sigma + 2 beta)/2 et).
double transformed_bound(int k, const CoefficientSet& coeffs, double x, double etilde_x);

/// 1 + eps^{-k} exp(-beta x / eps) for constant eps.
double classical_bound(int k, double eps, double beta, double x);

inline constexpr double kMaxReferenceH = 1.0 / 512.0;
inline constexpr double kUniformityFactor = 4.0;

/// sup over interior nodes of |u^(k)| / bound, with u^(k) from finite
/// differences of the reference. Second derivatives skip two nodes at each
/// end. `beta_scale` multiplies beta in the exponential weight (1 for the
/// actual bound). Passes iff the sup is finite; the sup is in `measured`.
/// Throws Error(Configuration) if the reference mesh is coarser than 1/512.
BoundCheckReport check_solution_bounds(const Scenario& scenario, const FemSolution& reference,
                                       SolutionBound which, double beta_scale = 1.0);

/// Same protocol against transformed_bound of order k.
BoundCheckReport check_transformed_bounds(const Scenario& scenario, const FemSolution& reference, int k);

/// Folds per-eps0 sup-ratios into one report: passes iff every ratio is finite
/// and max/min <= max_variation.
BoundCheckReport check_uniformity(const std::string& name, std::span<const BoundCheckReport> per_eps,
                                  double max_variation = kUniformityFactor);

/// Fine Galerkin solution used as the reference by the bound checks.
FemSolution reference_solution(const Scenario& scenario, double h = kMaxReferenceH);

enum class Suite { Lemmas, Barriers, Bounds, All };

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Batch of checks over the built-in scenarios; deterministic in `seed`.
std::vector<BoundCheckReport> run_verification_suite(Suite suite, std::uint64_t seed = kDefaultSeed);

}  // namespace cdlayer
