#pragma once

#include "cdlayer/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace cdlayer::testing {

inline CoefficientSet constant_coefficients(double eps, double b, double c, double f, double beta,
                                            double gamma)
{
    CoefficientSet k;
    k.eps = ScalarFunction::constant(eps);
    k.b = ScalarFunction::constant(b);
    k.c = ScalarFunction::constant(c);
    k.f = ScalarFunction::constant(f);
    k.beta = beta;
    k.gamma = gamma;
    k.eps_lower = eps;
    k.eps_upper = eps;
    k.sigma = 0.0;
    return k;
}

/// eps = scale (1 + x), b = 2, c = 1, f = 1.
inline CoefficientSet linear_eps_coefficients(double scale)
{
    CoefficientSet k = constant_coefficients(scale, 2.0, 1.0, 1.0, 1.0, 1.0);
    k.eps = ScalarFunction::affine(scale, scale);
    k.eps_upper = 2.0 * scale;
    k.sigma = scale;
    return k;
}

inline Scenario wrap(CoefficientSet k, std::string name = "test")
{
    Scenario s;
    s.name = std::move(name);
    s.coeffs = std::move(k);
    return s;
}

inline double relative_error(double value, double expected)
{
    return std::abs(value - expected) / std::max(std::abs(expected), 1e-300);
}

/// Dense Gaussian elimination with partial pivoting, kept deliberately naive.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        }
        std::swap(a[k], a[p]);
        std::swap(b[k], b[p]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= m * a[k][j];
            b[i] -= m * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace cdlayer::testing
