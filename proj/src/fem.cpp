#include "cdlayer/fem.hpp"

#include "cdlayer/calculus.hpp"
#include "cdlayer/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace cdlayer {

std::vector<double> TridiagonalSystem::apply(std::span<const double> x) const
{
    const std::size_t n = size();
    if (x.size() != n) throw Error(ErrorKind::Shape, "vector length does not match system size");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag[i] * x[i];
        if (i > 0) v += sub[i - 1] * x[i - 1];
        if (i + 1 < n) v += sup[i] * x[i + 1];
        y[i] = v;
    }
    return y;
}

namespace {

void check_quad_points(int q)
{
    if (q < 2 || q > kMaxGaussPoints) {
        throw Error(ErrorKind::Parameter, "quadrature points per element must lie in [2, 32]");
    }
}

void check_well_formed(const TridiagonalSystem& s)
{
    const std::size_t n = s.size();
    if (n == 0 || s.rhs.size() != n || s.sub.size() + 1 != n || s.sup.size() + 1 != n) {
        throw Error(ErrorKind::Shape, "malformed tridiagonal system");
    }
}

}  // namespace

TridiagonalSystem assemble(const Scenario& scenario, const LayerMesh& mesh,
                           int quad_points_per_element)
{
    check_quad_points(quad_points_per_element);
    const auto& x = mesh.nodes;
    if (x.size() < 3) throw Error(ErrorKind::Shape, "mesh needs at least one interior node");
    const auto& k = scenario.coeffs;
    const auto& rule = gauss_legendre(quad_points_per_element);
    // load vector: adaptive per element
    constexpr double kLoadRelTol = 1e-12;
    IntegrationOptions load_options;
    load_options.max_depth = 48;

    const std::size_t n = x.size() - 2;
    TridiagonalSystem sys;
    sys.sub.assign(n - 1, 0.0);
    sys.diag.assign(n, 0.0);
    sys.sup.assign(n - 1, 0.0);
    sys.rhs.assign(n, 0.0);

    for (std::size_t e = 0; e + 1 < x.size(); ++e) {
        const double lo = x[e];
        const double hi = x[e + 1];
        const double len = hi - lo;
        const double mid = 0.5 * (lo + hi);
        // local[p][q] = a(N_q, N_p); N_0 falls, N_1 rises across the element
        std::array<std::array<double, 2>, 2> local{};
        std::array<double, 2> load{};
        const std::array<double, 2> dn{-1.0 / len, 1.0 / len};
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const double t = mid + 0.5 * len * rule.points[g];
            const double w = 0.5 * len * rule.weights[g];
            const double eps = k.eps(t);
            const double b = k.b(t);
            const double c = k.c(t);
            const double f = k.f(t);
            if (!std::isfinite(eps) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(f)) {
                throw Error(ErrorKind::Assembly,
                            "non-finite coefficient in element " + std::to_string(e));
            }
            const std::array<double, 2> shape{(hi - t) / len, (t - lo) / len};
            for (std::size_t p = 0; p < 2; ++p) {
                for (std::size_t q = 0; q < 2; ++q) {
                    local[p][q] += w * (eps * dn[q] * dn[p] - b * dn[q] * shape[p] +
                                        c * shape[q] * shape[p]);
                }
            }
        }
        for (std::size_t p = 0; p < 2; ++p) {
            const auto integrand = [&, p](double t) {
                const double s = p == 0 ? (hi - t) / len : (t - lo) / len;
                return k.f(t) * s;
            };
            try {
                load[p] = integrate(integrand, lo, hi, kLoadRelTol, load_options);
            } catch (const Error& err) {
                throw Error(ErrorKind::Assembly,
                            "load integral failed in element " + std::to_string(e) + ": " + err.what());
            }
        }
        // global interior index of local node p is e + p - 1
        for (std::size_t p = 0; p < 2; ++p) {
            const std::size_t row_node = e + p;
            if (row_node == 0 || row_node == x.size() - 1) continue;
            const std::size_t row = row_node - 1;
            sys.rhs[row] += load[p];
            for (std::size_t q = 0; q < 2; ++q) {
                const std::size_t col_node = e + q;
                if (col_node == 0 || col_node == x.size() - 1) continue;
                const std::size_t col = col_node - 1;
                if (col == row) {
                    sys.diag[row] += local[p][q];
                } else if (col == row + 1) {
                    sys.sup[row] += local[p][q];
                } else {
                    sys.sub[col] += local[p][q];
                }
            }
        }
    }
    return sys;
}

std::vector<double> solve_tridiagonal(const TridiagonalSystem& system)
{
    check_well_formed(system);
    const std::size_t n = system.size();
    constexpr double kTinyPivot = 1e-300;

    std::vector<double> c_prime(n);
    std::vector<double> x(n);
    double pivot = system.diag[0];
    if (std::abs(pivot) < kTinyPivot) return solve_tridiagonal_pivoted(system);
    c_prime[0] = n > 1 ? system.sup[0] / pivot : 0.0;
    x[0] = system.rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = system.diag[i] - system.sub[i - 1] * c_prime[i - 1];
        if (std::abs(pivot) < kTinyPivot) return solve_tridiagonal_pivoted(system);
        c_prime[i] = i + 1 < n ? system.sup[i] / pivot : 0.0;
        x[i] = (system.rhs[i] - system.sub[i - 1] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c_prime[i] * x[i + 1];

    if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
        return solve_tridiagonal_pivoted(system);
    }
    return x;
}

std::vector<double> solve_tridiagonal_pivoted(const TridiagonalSystem& system)
{
    check_well_formed(system);
    const std::size_t n = system.size();
    // Row i of U holds d[i] (diagonal), u1[i], u2[i] (two superdiagonals).
    std::vector<double> d = system.diag;
    std::vector<double> u1(n, 0.0);
    std::vector<double> u2(n, 0.0);
    std::vector<double> l = system.sub;  // subdiagonal entries still to eliminate
    std::vector<double> r = system.rhs;
    for (std::size_t i = 0; i + 1 < n; ++i) u1[i] = system.sup[i];

    for (std::size_t i = 0; i + 1 < n; ++i) {
        // candidate rows: i (d[i], u1[i], u2[i]) and i+1 (l[i], d[i+1], u1[i+1])
        if (std::abs(l[i]) > std::abs(d[i])) {
            std::swap(d[i], l[i]);
            std::swap(u1[i], d[i + 1]);
            std::swap(u2[i], u1[i + 1]);
            std::swap(r[i], r[i + 1]);
        }
        if (d[i] == 0.0) throw Error(ErrorKind::Singular, "singular tridiagonal system");
        const double m = l[i] / d[i];
        d[i + 1] -= m * u1[i];
        u1[i + 1] -= m * u2[i];
        r[i + 1] -= m * r[i];
        l[i] = 0.0;
    }
    if (d[n - 1] == 0.0) throw Error(ErrorKind::Singular, "singular tridiagonal system");

    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double v = r[i];
        if (i + 1 < n) v -= u1[i] * x[i + 1];
        if (i + 2 < n) v -= u2[i] * x[i + 2];
        x[i] = v / d[i];
    }
    if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
        throw Error(ErrorKind::Singular, "tridiagonal solve produced non-finite values");
    }
    return x;
}

// ---------------------------------------------------------------------------

FemSolution::FemSolution(LayerMesh mesh, std::vector<double> coefficients)
    : mesh_(std::move(mesh)), coefficients_(std::move(coefficients))
{
    if (mesh_.nodes.size() < 2 || coefficients_.size() != mesh_.nodes.size()) {
        throw Error(ErrorKind::Shape, "coefficient count must equal node count");
    }
}

std::size_t FemSolution::locate(double x) const
{
    const auto& nodes = mesh_.nodes;
    if (x <= nodes.front()) return 0;
    if (x >= nodes.back()) return nodes.size() - 2;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    return static_cast<std::size_t>(std::distance(nodes.begin(), it)) - 1;
}

double FemSolution::slope(std::size_t k) const
{
    const auto& nodes = mesh_.nodes;
    return (coefficients_[k + 1] - coefficients_[k]) / (nodes[k + 1] - nodes[k]);
}

double FemSolution::operator()(double x) const
{
    const std::size_t k = locate(x);
    return coefficients_[k] + slope(k) * (x - mesh_.nodes[k]);
}

double FemSolution::derivative(double x) const
{
    return slope(locate(x));
}

FemSolution galerkin_solve(const Scenario& scenario, const LayerMesh& mesh, int quad_points_per_element)
{
    const auto system = assemble(scenario, mesh, quad_points_per_element);
    const auto interior = solve_tridiagonal(system);
    std::vector<double> coefficients(mesh.nodes.size(), 0.0);
    std::copy(interior.begin(), interior.end(), coefficients.begin() + 1);
    return FemSolution(mesh, std::move(coefficients));
}

double bilinear_form(const FemSolution& v, const FemSolution& w, const Scenario& scenario,
                     int quad_points_per_element)
{
    check_quad_points(quad_points_per_element);
    if (v.mesh().nodes != w.mesh().nodes) {
        throw Error(ErrorKind::Shape, "bilinear_form arguments live on different meshes");
    }
    const auto& k = scenario.coeffs;
    const auto& rule = gauss_legendre(quad_points_per_element);
    const auto nodes = v.nodes();
    double total = 0.0;
    for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
        const double lo = nodes[e];
        const double hi = nodes[e + 1];
        const double dv = v.slope(e);
        const double dw = w.slope(e);
        const double v0 = v.coefficients()[e];
        const double w0 = w.coefficients()[e];
        double sum = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.points[g];
            const double vv = v0 + dv * (t - lo);
            const double ww = w0 + dw * (t - lo);
            sum += rule.weights[g] * (k.eps(t) * dv * dw - k.b(t) * dv * ww + k.c(t) * vv * ww);
        }
        total += 0.5 * (hi - lo) * sum;
    }
    return total;
}

}  // namespace cdlayer
