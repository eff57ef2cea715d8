#include "cdlayer/calculus.hpp"

#include "cdlayer/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace cdlayer {

namespace {

QuadratureRule build_gauss_legendre(int n)
{
    QuadratureRule rule;
    rule.points.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    rule.order = 2 * n - 1;

    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // three-term recurrence for P_n(z) and P_n'(z)
            double p0 = 1.0;
            double p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // recompute derivative at the converged root for the weight
        double p0 = 1.0;
        double p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.points[lo] = -z;
        rule.points[hi] = z;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (n % 2 == 1) rule.points[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

double checked(const RealFunction& f, double x)
{
    const double v = f(x);
    if (!std::isfinite(v)) {
        throw Error(ErrorKind::Evaluation, "non-finite integrand value at x = " + std::to_string(x));
    }
    return v;
}

// Neumaier-compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v)
    {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    [[nodiscard]] double value() const { return sum + carry; }
};

}  // namespace

const QuadratureRule& gauss_legendre(int n)
{
    static const auto table = [] {
        std::array<QuadratureRule, kMaxGaussPoints + 1> t{};
        for (int k = 1; k <= kMaxGaussPoints; ++k) t[static_cast<std::size_t>(k)] = build_gauss_legendre(k);
        return t;
    }();
    if (n < 1 || n > kMaxGaussPoints) {
        throw Error(ErrorKind::Parameter, "Gauss-Legendre point count out of range");
    }
    return table[static_cast<std::size_t>(n)];
}

double integrate(const RealFunction& f, double a, double b, double rel_tol,
                 const IntegrationOptions& options)
{
    if (!(a <= b)) throw Error(ErrorKind::Parameter, "integrate requires a <= b");
    if (!(rel_tol > 0.0)) throw Error(ErrorKind::Parameter, "integrate requires rel_tol > 0");
    if (a == b) return 0.0;

    const auto& rule = gauss_legendre(5);
    auto panel = [&](double lo, double hi) {
        return apply_rule(rule, [&](double x) { return checked(f, x); }, lo, hi);
    };

    std::vector<double> edges{a};
    for (double p : options.breakpoints) {
        if (p > edges.back() && p < b) edges.push_back(p);
    }
    edges.push_back(b);

    struct Panel {
        double lo;
        double hi;
        double estimate;
        int depth;
    };
    std::vector<Panel> stack;
    stack.reserve(edges.size() + 64);
    double abs_estimate = 0.0;
    for (std::size_t k = edges.size() - 1; k-- > 0;) {
        const double v = panel(edges[k], edges[k + 1]);
        abs_estimate += std::abs(v);
        stack.push_back({edges[k], edges[k + 1], v, 0});
    }

    CompensatedSum total;
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (p.lo + p.hi);
        if (!(mid > p.lo && mid < p.hi)) {
            total.add(p.estimate);
            continue;
        }
        const double left = panel(p.lo, mid);
        const double right = panel(mid, p.hi);
        const double fine = left + right;
        abs_estimate += std::abs(left) + std::abs(right) - std::abs(p.estimate);
        const double tol = std::max(rel_tol * abs_estimate, options.abs_tol);
        if (std::abs(fine - p.estimate) <= tol) {
            total.add(fine);
            continue;
        }
        if (p.depth + 1 > options.max_depth) {
            throw Error(ErrorKind::Convergence,
                        "integrate did not converge on [" + std::to_string(p.lo) + ", " +
                            std::to_string(p.hi) + "]");
        }
        stack.push_back({mid, p.hi, right, p.depth + 1});
        stack.push_back({p.lo, mid, left, p.depth + 1});
    }
    return total.value();
}

std::vector<double> graded_breakpoints(double a, double b, double toward, int count)
{
    if (!(a < b)) throw Error(ErrorKind::Parameter, "graded_breakpoints requires a < b");
    if (toward != a && toward != b) {
        throw Error(ErrorKind::Parameter, "graded_breakpoints: toward must be an endpoint");
    }
    std::vector<double> out;
    const double width = b - a;
    double gap = 0.5 * width;
    for (int k = 0; k < count; ++k, gap *= 0.5) {
        const double p = toward == b ? b - gap : a + gap;
        if (!(p > a && p < b)) break;
        if (!out.empty() && p == out.back()) break;
        out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------

CumulativeIntegral::CumulativeIntegral(RealFunction integrand, std::size_t breakpoint_count,
                                       double rel_tol)
    : integrand_(std::move(integrand)), rel_tol_(rel_tol)
{
    if (breakpoint_count < 4) {
        throw Error(ErrorKind::Parameter, "CumulativeIntegral needs at least 4 breakpoints");
    }
    // A quarter of the breakpoints fall geometrically from the first uniform
    // spacing down to 1e-12; the rest are uniform on [0,1].
    const std::size_t n_geo = breakpoint_count / 4;
    const std::size_t n_uniform = breakpoint_count - n_geo - 1;
    const double du = 1.0 / static_cast<double>(n_uniform);
    const double ratio = std::pow(1e-12 / du, 1.0 / static_cast<double>(n_geo));

    breakpoints_.reserve(breakpoint_count);
    breakpoints_.push_back(0.0);
    for (std::size_t k = n_geo; k >= 1; --k) {
        breakpoints_.push_back(du * std::pow(ratio, static_cast<double>(k)));
    }
    for (std::size_t k = 1; k <= n_uniform; ++k) {
        breakpoints_.push_back(k == n_uniform ? 1.0 : static_cast<double>(k) * du);
    }

    partial_sums_.resize(breakpoints_.size());
    CompensatedSum running;
    partial_sums_[0] = 0.0;
    for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
        running.add(integrate(integrand_, breakpoints_[k - 1], breakpoints_[k], rel_tol_));
        partial_sums_[k] = running.value();
    }
}

double CumulativeIntegral::operator()(double x) const
{
    constexpr double kSlack = 1e-14;
    if (!(x >= -kSlack && x <= 1.0 + kSlack)) {
        throw Error(ErrorKind::Parameter, "cumulative integral evaluated outside [0,1]");
    }
    x = std::clamp(x, 0.0, 1.0);
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    const auto k = static_cast<std::size_t>(std::distance(breakpoints_.begin(), it)) - 1;
    if (breakpoints_[k] == x) return partial_sums_[k];
    return partial_sums_[k] + integrate(integrand_, breakpoints_[k], x, rel_tol_);
}

CumulativeIntegral layer_integral(const CoefficientSet& coeffs, LayerIntegralKind kind)
{
    const ScalarFunction eps = coeffs.eps;
    switch (kind) {
    case LayerIntegralKind::E:
        return CumulativeIntegral([eps](double t) { return 1.0 / eps(t); });
    case LayerIntegralKind::ETilde: {
        const double upper = coeffs.eps_upper;
        return CumulativeIntegral([eps, upper](double t) { return 1.0 / std::sqrt(upper * eps(t)); });
    }
    case LayerIntegralKind::T: {
        const double lower = coeffs.eps_lower;
        return CumulativeIntegral([eps, lower](double t) { return std::sqrt(lower / eps(t)); });
    }
    }
    throw Error(ErrorKind::Parameter, "unknown layer integral kind");
}

double invert_monotone(const CumulativeIntegral& g, double target, double tol)
{
    const double slack = tol * std::max(1.0, std::abs(target));
    double lo = 0.0;
    double hi = 1.0;
    double flo = g(lo) - target;
    double fhi = g.total() - target;
    if (flo > slack || fhi < -slack) {
        throw Error(ErrorKind::OutOfRange, "invert_monotone target outside [g(0), g(1)]");
    }
    if (std::abs(flo) <= slack) return lo;
    if (std::abs(fhi) <= slack) return hi;

    int side = 0;
    double width_before = hi - lo;
    for (int iter = 0; iter < 500; ++iter) {
        double x = (lo * fhi - hi * flo) / (fhi - flo);
        // bisect every third step unless the bracket halved in the meantime
        if (iter % 3 == 2) {
            if (hi - lo > 0.5 * width_before) x = 0.5 * (lo + hi);
            width_before = hi - lo;
        }
        if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
        if (!(x > lo && x < hi)) {
            return std::abs(flo) <= std::abs(fhi) ? lo : hi;
        }
        const double fx = g(x) - target;
        if (std::abs(fx) <= slack) return x;
        if (fx < 0.0) {
            lo = x;
            flo = fx;
            if (side == -1) fhi *= 0.5;
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if (side == 1) flo *= 0.5;
            side = 1;
        }
    }
    throw Error(ErrorKind::Convergence, "invert_monotone exhausted its iteration budget");
}

GridDerivative differentiate_grid(std::span<const double> values, std::span<const double> nodes,
                                  DerivativeOrder order)
{
    const std::size_t n = nodes.size();
    if (n < 5) throw Error(ErrorKind::Shape, "differentiate_grid needs at least 5 nodes");
    if (values.size() != n) throw Error(ErrorKind::Shape, "values and nodes differ in length");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(nodes[i] > nodes[i - 1])) {
            throw Error(ErrorKind::Parameter, "differentiate_grid nodes must be strictly increasing");
        }
    }

    GridDerivative out;
    out.values.resize(n);
    out.one_sided.assign(n, 0);
    out.one_sided.front() = 1;
    out.one_sided.back() = 1;

    // second derivative of the quadratic through (i-1, i, i+1)
    auto second = [&](std::size_t i) {
        const double h1 = nodes[i] - nodes[i - 1];
        const double h2 = nodes[i + 1] - nodes[i];
        return 2.0 * (values[i - 1] / (h1 * (h1 + h2)) - values[i] / (h1 * h2) +
                      values[i + 1] / (h2 * (h1 + h2)));
    };

    if (order == DerivativeOrder::First) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h1 = nodes[i] - nodes[i - 1];
            const double h2 = nodes[i + 1] - nodes[i];
            out.values[i] = -h2 / (h1 * (h1 + h2)) * values[i - 1] +
                            (h2 - h1) / (h1 * h2) * values[i] +
                            h1 / (h2 * (h1 + h2)) * values[i + 1];
        }
        {
            const double h1 = nodes[1] - nodes[0];
            const double h2 = nodes[2] - nodes[1];
            out.values[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * values[0] +
                            (h1 + h2) / (h1 * h2) * values[1] - h1 / (h2 * (h1 + h2)) * values[2];
        }
        {
            const double h1 = nodes[n - 2] - nodes[n - 3];
            const double h2 = nodes[n - 1] - nodes[n - 2];
            out.values[n - 1] = h2 / (h1 * (h1 + h2)) * values[n - 3] -
                                (h1 + h2) / (h1 * h2) * values[n - 2] +
                                (2.0 * h2 + h1) / (h2 * (h1 + h2)) * values[n - 1];
        }
    } else {
        for (std::size_t i = 1; i + 1 < n; ++i) out.values[i] = second(i);
        out.values[0] = second(1);
        out.values[n - 1] = second(n - 2);
    }
    return out;
}

}  // namespace cdlayer
