#pragma once

#include <cmath>

#include "fehmm/fem/quadrature.hpp"
#include "fehmm/fem/space.hpp"

namespace fehmm::fem {

struct Norms {
    double l2 = 0.0;
    double h1_semi = 0.0;

    double h1() const { return std::sqrt(l2 * l2 + h1_semi * h1_semi); }
};

/// L2 norm and H1 seminorm by (p+1)-point Gauss per element, exact for the space.
inline Norms norms(const FeFunction& u) {
    const FeSpace& space = u.space();
    const ShapeTable shape(space.degree(), static_cast<std::size_t>(space.degree()) + 1);
    const double h = space.mesh().width();
    double l2 = 0.0, h1 = 0.0;
    for (std::size_t e = 0; e < space.mesh().n_elems(); ++e)
        for (std::size_t q = 0; q < shape.rule.size(); ++q) {
            double v = 0.0, d = 0.0;
            for (std::size_t i = 0; i < shape.n_basis(); ++i) {
                const double c = u.local(e, static_cast<int>(i));
                v += c * shape.value(q, i);
                d += c * shape.deriv(q, i);
            }
            d /= h;
            l2 += h * shape.rule.weights[q] * v * v;
            h1 += h * shape.rule.weights[q] * d * d;
        }
    return {std::sqrt(l2), std::sqrt(h1)};
}

/// Norms of u - (g, dg) with analytic reference value g and derivative dg,
/// integrated with n_points Gauss points per element.
template <class G, class DG>
Norms error_norms(const FeFunction& u, G&& g, DG&& dg, std::size_t n_points = 4) {
    const FeSpace& space = u.space();
    const ShapeTable shape(space.degree(), n_points);
    const double h = space.mesh().width();
    double l2 = 0.0, h1 = 0.0;
    for (std::size_t e = 0; e < space.mesh().n_elems(); ++e)
        for (std::size_t q = 0; q < shape.rule.size(); ++q) {
            double v = 0.0, d = 0.0;
            for (std::size_t i = 0; i < shape.n_basis(); ++i) {
                const double c = u.local(e, static_cast<int>(i));
                v += c * shape.value(q, i);
                d += c * shape.deriv(q, i);
            }
            d /= h;
            const double x = space.mesh().map(e, shape.rule.points[q]);
            const double ev = v - g(x), ed = d - dg(x);
            l2 += h * shape.rule.weights[q] * ev * ev;
            h1 += h * shape.rule.weights[q] * ed * ed;
        }
    return {std::sqrt(l2), std::sqrt(h1)};
}

}  // namespace fehmm::fem
