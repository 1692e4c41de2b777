#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fehmm::fem {

/// Gauss-Legendre rule mapped to the reference interval [0, 1].
struct GaussRule {
    std::vector<double> points;
    std::vector<double> weights;

    std::size_t size() const noexcept { return points.size(); }
};

/// n-point Gauss-Legendre rule on [0, 1], exact for polynomials of degree 2n-1.
/// Nodes come from Newton iteration on P_n started at the Chebyshev guesses.
inline GaussRule gauss_legendre(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gauss_legendre: need at least one point");
    GaussRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / static_cast<double>(j);
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / static_cast<double>(j);
        }
        dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1,1] -> [0,1]
        rule.points[i] = 0.5 * (1.0 - z);
        rule.points[n - 1 - i] = 0.5 * (1.0 + z);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    if (n % 2 == 1) rule.points[n / 2] = 0.5;
    return rule;
}

/// Equispaced Lagrange basis of degree p on [0, 1]: values and derivatives at xi.
inline void lagrange_basis(int p, double xi, double* values, double* derivs) {
    for (int i = 0; i <= p; ++i) {
        const double xi_i = static_cast<double>(i) / p;
        double v = 1.0;
        double d = 0.0;
        for (int j = 0; j <= p; ++j) {
            if (j == i) continue;
            const double xi_j = static_cast<double>(j) / p;
            const double denom = xi_i - xi_j;
            // product rule, accumulated incrementally
            d = d * (xi - xi_j) / denom + v / denom;
            v *= (xi - xi_j) / denom;
        }
        values[i] = v;
        derivs[i] = d;
    }
}

/// Basis values and reference derivatives tabulated at the points of a rule.
struct ShapeTable {
    int degree = 1;
    GaussRule rule;
    std::vector<double> phi;   // [q * (p+1) + i]
    std::vector<double> dphi;  // d/dxi on the reference element

    ShapeTable(int p, std::size_t n_points) : degree(p), rule(gauss_legendre(n_points)) {
        const std::size_t nb = static_cast<std::size_t>(p) + 1;
        phi.resize(rule.size() * nb);
        dphi.resize(rule.size() * nb);
        for (std::size_t q = 0; q < rule.size(); ++q)
            lagrange_basis(p, rule.points[q], &phi[q * nb], &dphi[q * nb]);
    }

    std::size_t n_basis() const noexcept { return static_cast<std::size_t>(degree) + 1; }
    double value(std::size_t q, std::size_t i) const { return phi[q * n_basis() + i]; }
    double deriv(std::size_t q, std::size_t i) const { return dphi[q * n_basis() + i]; }
};

}  // namespace fehmm::fem
