#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fehmm/error.hpp"
#include "fehmm/fem/quadrature.hpp"

namespace fehmm::fem {

/// Uniform mesh of [a, b] with n_elems elements.
class Mesh1D {
public:
    Mesh1D(double a, double b, std::size_t n_elems) : a_(a), b_(b), n_(n_elems) {
        if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
            throw InputError("Mesh1D: need finite a < b");
        if (n_elems == 0) throw InputError("Mesh1D: need at least one element");
    }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    std::size_t n_elems() const noexcept { return n_; }
    double width() const noexcept { return (b_ - a_) / static_cast<double>(n_); }
    double vertex(std::size_t i) const noexcept {
        return i == n_ ? b_ : a_ + (b_ - a_) * static_cast<double>(i) / static_cast<double>(n_);
    }
    double barycenter(std::size_t e) const noexcept { return 0.5 * (vertex(e) + vertex(e + 1)); }
    /// Global coordinate of reference point xi in [0, 1] of element e.
    double map(std::size_t e, double xi) const noexcept { return vertex(e) + width() * xi; }

    bool operator==(const Mesh1D&) const = default;

private:
    double a_;
    double b_;
    std::size_t n_;
};

enum class Boundary { none, dirichlet_zero, periodic };

/// Continuous Lagrange space of degree p on a Mesh1D with equispaced element
/// nodes. Node j sits at a + j * h / p; p = 2 puts one node at each midpoint.
class FeSpace {
public:
    FeSpace(Mesh1D mesh, int degree, Boundary boundary) : mesh_(mesh), degree_(degree), boundary_(boundary) {
        if (degree < 1 || degree > 8) throw InputError("FeSpace: degree must be in [1, 8]");
        if (boundary == Boundary::periodic && n_nodes() < 4)
            throw InputError("FeSpace: periodic space needs at least 3 distinct dofs");
        if (boundary == Boundary::dirichlet_zero && n_nodes() < 3)
            throw InputError("FeSpace: Dirichlet space has no interior dofs");
    }

    const Mesh1D& mesh() const noexcept { return mesh_; }
    int degree() const noexcept { return degree_; }
    Boundary boundary() const noexcept { return boundary_; }

    std::size_t n_nodes() const noexcept { return mesh_.n_elems() * static_cast<std::size_t>(degree_) + 1; }

    std::size_t n_dofs() const noexcept {
        switch (boundary_) {
            case Boundary::none: return n_nodes();
            case Boundary::dirichlet_zero: return n_nodes() - 2;
            case Boundary::periodic: return n_nodes() - 1;
        }
        return 0;
    }

    double node_x(std::size_t j) const noexcept {
        const std::size_t p = static_cast<std::size_t>(degree_);
        const std::size_t e = std::min(j / p, mesh_.n_elems() - 1);
        return mesh_.map(e, static_cast<double>(j - e * p) / static_cast<double>(p));
    }

    /// Dof index of global node j, or -1 for a constrained (Dirichlet) node.
    long dof_of_node(std::size_t j) const noexcept {
        switch (boundary_) {
            case Boundary::none: return static_cast<long>(j);
            case Boundary::dirichlet_zero: return (j == 0 || j + 1 == n_nodes()) ? -1 : static_cast<long>(j) - 1;
            case Boundary::periodic: return j + 1 == n_nodes() ? 0 : static_cast<long>(j);
        }
        return -1;
    }

    long element_dof(std::size_t e, int local) const noexcept {
        return dof_of_node(e * static_cast<std::size_t>(degree_) + static_cast<std::size_t>(local));
    }

    /// Bandwidth of the assembled matrices (for non-periodic numbering).
    std::size_t bandwidth() const noexcept { return static_cast<std::size_t>(degree_); }

    bool operator==(const FeSpace&) const = default;

private:
    Mesh1D mesh_;
    int degree_;
    Boundary boundary_;
};

/// A function of a FeSpace, given by one coefficient per dof.
class FeFunction {
public:
    explicit FeFunction(FeSpace space) : space_(std::move(space)), coeffs_(space_.n_dofs(), 0.0) {}
    FeFunction(FeSpace space, std::vector<double> coeffs) : space_(std::move(space)), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != space_.n_dofs())
            throw InputError("FeFunction: got " + std::to_string(coeffs_.size()) + " coefficients for " +
                             std::to_string(space_.n_dofs()) + " dofs");
    }

    const FeSpace& space() const noexcept { return space_; }
    const std::vector<double>& coefficients() const noexcept { return coeffs_; }
    std::vector<double>& coefficients() noexcept { return coeffs_; }

    double node_value(std::size_t j) const {
        const long d = space_.dof_of_node(j);
        return d < 0 ? 0.0 : coeffs_[static_cast<std::size_t>(d)];
    }

    /// Values at every global node, constrained nodes included.
    std::vector<double> node_values() const {
        std::vector<double> v(space_.n_nodes());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = node_value(j);
        return v;
    }

    double value(std::size_t e, double xi) const {
        double phi[9], dphi[9];
        lagrange_basis(space_.degree(), xi, phi, dphi);
        double v = 0.0;
        for (int i = 0; i <= space_.degree(); ++i) v += phi[i] * local(e, i);
        return v;
    }

    double derivative(std::size_t e, double xi) const {
        double phi[9], dphi[9];
        lagrange_basis(space_.degree(), xi, phi, dphi);
        double v = 0.0;
        for (int i = 0; i <= space_.degree(); ++i) v += dphi[i] * local(e, i);
        return v / space_.mesh().width();
    }

    /// Point evaluation; x is clamped to the mesh interval.
    double operator()(double x) const {
        const auto& m = space_.mesh();
        double r = (x - m.a()) / m.width();
        r = std::clamp(r, 0.0, static_cast<double>(m.n_elems()));
        std::size_t e = std::min(static_cast<std::size_t>(r), m.n_elems() - 1);
        return value(e, r - static_cast<double>(e));
    }

    double local(std::size_t e, int i) const {
        return node_value(e * static_cast<std::size_t>(space_.degree()) + static_cast<std::size_t>(i));
    }

private:
    FeSpace space_;
    std::vector<double> coeffs_;
};

}  // namespace fehmm::fem
