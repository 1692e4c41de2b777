#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fehmm/error.hpp"
#include "fehmm/fem/banded.hpp"
#include "fehmm/fem/quadrature.hpp"
#include "fehmm/fem/space.hpp"

namespace fehmm::fem {

/// Band matrix sized for the dofs of a non-periodic space.
inline BandedMatrix make_matrix(const FeSpace& space) {
    if (space.boundary() == Boundary::periodic)
        throw InputError("make_matrix: periodic spaces assemble into PeriodicBandedMatrix");
    return BandedMatrix(space.n_dofs(), space.bandwidth(), space.bandwidth());
}

/// Adds the element matrices local(e, K_e) into m, where K_e is a
/// (p+1) x (p+1) row-major buffer filled by the callback. Constrained dofs
/// are skipped.
template <class Matrix, class LocalFn>
void assemble_into(const FeSpace& space, Matrix& m, LocalFn&& local) {
    const std::size_t nb = static_cast<std::size_t>(space.degree()) + 1;
    std::vector<double> ke(nb * nb);
    std::vector<long> dofs(nb);
    for (std::size_t e = 0; e < space.mesh().n_elems(); ++e) {
        std::fill(ke.begin(), ke.end(), 0.0);
        local(e, std::span<double>(ke));
        for (std::size_t i = 0; i < nb; ++i) dofs[i] = space.element_dof(e, static_cast<int>(i));
        for (std::size_t i = 0; i < nb; ++i) {
            if (dofs[i] < 0) continue;
            for (std::size_t j = 0; j < nb; ++j) {
                if (dofs[j] < 0) continue;
                m.add(static_cast<std::size_t>(dofs[i]), static_cast<std::size_t>(dofs[j]), ke[i * nb + j]);
            }
        }
    }
}

template <class Matrix>
void add_mass(const FeSpace& space, Matrix& m, double scale = 1.0) {
    const ShapeTable shape(space.degree(), static_cast<std::size_t>(space.degree()) + 1);
    const double h = space.mesh().width();
    const std::size_t nb = shape.n_basis();
    assemble_into(space, m, [&](std::size_t, std::span<double> ke) {
        for (std::size_t q = 0; q < shape.rule.size(); ++q) {
            const double w = scale * h * shape.rule.weights[q];
            for (std::size_t i = 0; i < nb; ++i)
                for (std::size_t j = 0; j < nb; ++j) ke[i * nb + j] += w * shape.value(q, i) * shape.value(q, j);
        }
    });
}

/// Stiffness with a coefficient sampled at n_points Gauss points of every element (0: 2p).
template <class Matrix, class Coef>
void add_stiffness(const FeSpace& space, Matrix& m, Coef&& coefficient_at, double scale = 1.0,
                   std::size_t n_points = 0) {
    const ShapeTable shape(space.degree(), n_points ? n_points : 2 * static_cast<std::size_t>(space.degree()));
    const double h = space.mesh().width();
    const std::size_t nb = shape.n_basis();
    assemble_into(space, m, [&](std::size_t e, std::span<double> ke) {
        for (std::size_t q = 0; q < shape.rule.size(); ++q) {
            const double c = coefficient_at(space.mesh().map(e, shape.rule.points[q]));
            if (!std::isfinite(c)) throw NumericalError("assemble_stiffness: non-finite coefficient value");
            const double w = scale * shape.rule.weights[q] * c / h;
            for (std::size_t i = 0; i < nb; ++i)
                for (std::size_t j = 0; j < nb; ++j) ke[i * nb + j] += w * shape.deriv(q, i) * shape.deriv(q, j);
        }
    });
}

inline BandedMatrix assemble_mass(const FeSpace& space) {
    BandedMatrix m = make_matrix(space);
    add_mass(space, m);
    return m;
}

template <class Coef>
BandedMatrix assemble_stiffness(const FeSpace& space, Coef&& coefficient_at) {
    BandedMatrix m = make_matrix(space);
    add_stiffness(space, m, coefficient_at);
    return m;
}

/// Load vector (f, phi_i) with n_points Gauss points per element.
template <class F>
std::vector<double> assemble_load(const FeSpace& space, F&& f, std::size_t n_points) {
    const ShapeTable shape(space.degree(), n_points);
    const double h = space.mesh().width();
    std::vector<double> b(space.n_dofs(), 0.0);
    for (std::size_t e = 0; e < space.mesh().n_elems(); ++e)
        for (std::size_t q = 0; q < shape.rule.size(); ++q) {
            const double fv = f(space.mesh().map(e, shape.rule.points[q]));
            for (std::size_t i = 0; i < shape.n_basis(); ++i) {
                const long d = space.element_dof(e, static_cast<int>(i));
                if (d >= 0) b[static_cast<std::size_t>(d)] += h * shape.rule.weights[q] * fv * shape.value(q, i);
            }
        }
    return b;
}

/// L2 projection onto the space (mass system solved directly).
template <class F>
FeFunction l2_project(const FeSpace& space, F&& f) {
    const auto rhs = assemble_load(space, f, static_cast<std::size_t>(space.degree()) + 2);
    if (space.boundary() == Boundary::periodic) {
        PeriodicBandedMatrix m(space.n_dofs(), space.bandwidth());
        add_mass(space, m);
        return FeFunction(space, PeriodicLU(m).solve(rhs));
    }
    return FeFunction(space, solve_banded(assemble_mass(space), rhs));
}

/// Nodal interpolant.
template <class F>
FeFunction interpolate(const FeSpace& space, F&& f) {
    FeFunction u(space);
    for (std::size_t j = 0; j < space.n_nodes(); ++j) {
        const long d = space.dof_of_node(j);
        if (d >= 0) u.coefficients()[static_cast<std::size_t>(d)] = f(space.node_x(j));
    }
    return u;
}

}  // namespace fehmm::fem
