#include "cdlayer/mesh.hpp"

#include "cdlayer/error.hpp"

#include <cmath>
#include <sstream>

namespace cdlayer {

namespace {

void check_h(double h)
{
    if (!(h > 0.0 && h < 1.0)) throw Error(ErrorKind::Parameter, "mesh parameter h must lie in (0,1)");
}

}  // namespace

double compute_tau_star(const CoefficientSet& coeffs, const CumulativeIntegral& e, double h)
{
    check_h(h);
    if (!(coeffs.beta > 0.0)) throw Error(ErrorKind::Parameter, "beta must be positive");
    const double target = -(2.0 / coeffs.beta) * std::log(h);
    if (target > e.total()) {
        std::ostringstream msg;
        msg << "transition point beyond x = 1 (e(1) = " << e.total() << " < " << target
            << "); eps is not small relative to h";
        throw Error(ErrorKind::DegenerateRegime, msg.str());
    }
    const double tau_star = invert_monotone(e, target);
    if (tau_star > 0.5) {
        std::ostringstream msg;
        msg << "transition point tau* = " << tau_star << " exceeds 1/2";
        throw Error(ErrorKind::DegenerateRegime, msg.str());
    }
    return tau_star;
}

LayerMesh build_mesh(const CoefficientSet& coeffs, const CumulativeIntegral& e, double h,
                     double delta, std::size_t node_cap)
{
    if (!(delta > 0.0)) throw Error(ErrorKind::Parameter, "delta must be positive");
    LayerMesh mesh;
    mesh.h = h;
    mesh.delta = delta;
    mesh.tau_star = compute_tau_star(coeffs, e, h);

    auto& x = mesh.nodes;
    x.push_back(0.0);
    x.push_back(h * delta * coeffs.eps_lower);
    while (x.back() < mesh.tau_star) {
        if (x.size() >= node_cap) {
            throw Error(ErrorKind::Resource, "graded mesh exceeds the node cap");
        }
        x.push_back(x.back() * (1.0 + h));
    }
    mesh.tau_index = x.size() - 1;
    mesh.n_star = mesh.tau_index - 1;

    const double tau = x.back();
    const double coarse = std::ceil((1.0 - tau) / h);
    if (!(tau < 1.0)) {
        throw Error(ErrorKind::DegenerateRegime, "graded part reaches the right boundary");
    }
    const auto m = static_cast<std::size_t>(std::max(coarse, 1.0));
    if (x.size() + m > node_cap) throw Error(ErrorKind::Resource, "mesh exceeds the node cap");
    const double spacing = (1.0 - tau) / static_cast<double>(m);
    for (std::size_t k = 1; k < m; ++k) x.push_back(tau + static_cast<double>(k) * spacing);
    x.push_back(1.0);
    return mesh;
}

double predict_cardinality(const CoefficientSet& coeffs, double h)
{
    check_h(h);
    const double log_ratio = -std::log(h) / h;
    if (log_ratio < 1.0) {
        throw Error(ErrorKind::Parameter, "predict_cardinality requires -ln(h)/h >= 1");
    }
    return (std::log(coeffs.eps_upper / coeffs.eps_lower) + std::log(log_ratio)) / h;
}

LayerMesh uniform_mesh(std::size_t elements)
{
    if (elements < 2) throw Error(ErrorKind::Parameter, "uniform_mesh needs at least 2 elements");
    LayerMesh mesh;
    mesh.h = 1.0 / static_cast<double>(elements);
    mesh.nodes.resize(elements + 1);
    for (std::size_t i = 0; i <= elements; ++i) {
        mesh.nodes[i] = static_cast<double>(i) / static_cast<double>(elements);
    }
    mesh.nodes.back() = 1.0;
    return mesh;
}

std::vector<std::string> check_mesh_invariants(const LayerMesh& mesh, const CoefficientSet& coeffs)
{
    std::vector<std::string> out;
    auto fail = [&out](const std::string& what) { out.push_back(what); };
    const auto& x = mesh.nodes;
    if (x.size() < 3) {
        fail("fewer than 3 nodes");
        return out;
    }
    if (x.front() != 0.0) fail("first node is not 0");
    if (x.back() != 1.0) fail("last node is not 1");
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) fail("nodes not strictly increasing at " + std::to_string(i));
    }
    if (x[1] != mesh.h * mesh.delta * coeffs.eps_lower) fail("x_1 != h * delta * eps_lower");
    for (std::size_t i = 1; i <= mesh.n_star; ++i) {
        const double expected = x[i] * (1.0 + mesh.h);
        if (std::abs(x[i + 1] - expected) > 1e-14 * expected) {
            fail("graded recursion broken at " + std::to_string(i));
        }
    }
    if (mesh.tau_index != mesh.n_star + 1) fail("tau_index != n_star + 1");
    if (!(x[mesh.tau_index] >= mesh.tau_star)) fail("tau < tau*");
    if (!(x[mesh.tau_index - 1] < mesh.tau_star)) fail("node before tau is not below tau*");

    const std::size_t coarse_elements = x.size() - 1 - mesh.tau_index;
    if (coarse_elements == 0) {
        fail("no coarse part");
        return out;
    }
    const double spacing = (1.0 - x[mesh.tau_index]) / static_cast<double>(coarse_elements);
    if (spacing > mesh.h * (1.0 + 1e-12)) fail("coarse spacing exceeds h");
    for (std::size_t i = mesh.tau_index + 1; i < x.size(); ++i) {
        if (std::abs((x[i] - x[i - 1]) - spacing) > 1e-9 * spacing) {
            fail("coarse part not equidistant at " + std::to_string(i));
            break;
        }
    }
    return out;
}

}  // namespace cdlayer
