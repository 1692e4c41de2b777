#pragma once

// Reference value of A_0(t, x) from the periodic cell problem on (0,1) x Y:
//
//   d chi/ds - d/dy ( a (1 + d chi/dy) ) = 0,  chi periodic in s and y,
//   A_0 = int_0^1 int_Y a (1 + d chi/dy) dy ds.
//
// The time-periodic orbit is reached by sweeping whole periods from chi = 0
// until the state returns to itself. Coefficients without s-dependence take the
// stationary elliptic cell problem instead.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fehmm/coeff/coefficient.hpp"
#include "fehmm/error.hpp"
#include "fehmm/fem/assembly.hpp"
#include "fehmm/fem/banded.hpp"
#include "fehmm/fem/space.hpp"
#include "fehmm/log.hpp"

namespace fehmm::micro {

struct OracleSettings {
    int n_y = 512;
    int n_s = 256;
    double period_tol = 1e-10;
    int max_periods = 200;
    int degree = 2;
};

struct OracleResult {
    double a0 = 0.0;
    int periods = 0;       // whole periods swept (0 for the stationary problem)
    bool stationary = false;
    std::vector<fem::FeFunction> chi;  // s_k = k / n_s, k = 0..n_s (one entry if stationary)
};

namespace detail {

struct PeriodicCellOperators {
    fem::FeSpace space;
    fem::ShapeTable shape;
    std::vector<double> mass_ones;  // M * 1, the mean functional

    PeriodicCellOperators(int n_y, int degree)
        : space(fem::Mesh1D(-0.5, 0.5, static_cast<std::size_t>(n_y)), degree, fem::Boundary::periodic),
          shape(degree, 2 * static_cast<std::size_t>(degree)),
          mass_ones(fem::assemble_load(space, [](double) { return 1.0; }, static_cast<std::size_t>(degree) + 1)) {}

    template <class A>
    void stiffness_and_load(A&& a_of_y, fem::PeriodicBandedMatrix& k, std::vector<double>& load) const {
        const std::size_t nb = shape.n_basis();
        const double h = space.mesh().width();
        load.assign(space.n_dofs(), 0.0);
        std::vector<double> aq(shape.rule.size());
        for (std::size_t e = 0; e < space.mesh().n_elems(); ++e) {
            for (std::size_t q = 0; q < aq.size(); ++q) aq[q] = a_of_y(space.mesh().map(e, shape.rule.points[q]));
            for (std::size_t i = 0; i < nb; ++i) {
                const auto di = static_cast<std::size_t>(space.element_dof(e, static_cast<int>(i)));
                double li = 0.0;
                for (std::size_t q = 0; q < aq.size(); ++q) li += shape.rule.weights[q] * aq[q] * shape.deriv(q, i);
                load[di] -= li;
                for (std::size_t j = 0; j < nb; ++j) {
                    const auto dj = static_cast<std::size_t>(space.element_dof(e, static_cast<int>(j)));
                    double kij = 0.0;
                    for (std::size_t q = 0; q < aq.size(); ++q)
                        kij += shape.rule.weights[q] * aq[q] * shape.deriv(q, i) * shape.deriv(q, j);
                    k.add(di, dj, kij / h);
                }
            }
        }
    }

    template <class A>
    double flux(A&& a_of_y, const std::vector<double>& chi) const {
        const double h = space.mesh().width();
        double s = 0.0;
        for (std::size_t e = 0; e < space.mesh().n_elems(); ++e)
            for (std::size_t q = 0; q < shape.rule.size(); ++q) {
                double d = 0.0;
                for (std::size_t i = 0; i < shape.n_basis(); ++i)
                    d += chi[static_cast<std::size_t>(space.element_dof(e, static_cast<int>(i)))] * shape.deriv(q, i);
                s += h * shape.rule.weights[q] * a_of_y(space.mesh().map(e, shape.rule.points[q])) * (1.0 + d / h);
            }
        return s;
    }

    void remove_mean(std::vector<double>& chi) const {
        double mean = 0.0;
        for (std::size_t i = 0; i < chi.size(); ++i) mean += mass_ones[i] * chi[i];
        for (double& v : chi) v -= mean;
    }
};

inline double l2_norm(const fem::PeriodicBandedMatrix& mass, const std::vector<double>& v) {
    const auto mv = mass.multiply(v);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * mv[i];
    return std::sqrt(std::max(s, 0.0));
}

}  // namespace detail

inline OracleResult a0_oracle_periodic(const coeff::MultiscaleCoefficient& c, double t, double x,
                                       const OracleSettings& opt = {}) {
    if (opt.n_y < 4 || opt.n_s < 4) throw InputError("a0_oracle_periodic: n_y and n_s must be at least 4");
    if (!(opt.period_tol > 0.0) || opt.max_periods < 1) throw InputError("a0_oracle_periodic: invalid period settings");
    const detail::PeriodicCellOperators ops(opt.n_y, opt.degree);
    const std::size_t nd = ops.space.n_dofs();
    OracleResult out;

    if (!c.depends_on_s()) {
        const auto a_of_y = [&](double y) { return c(t, x, 0.0, y); };
        fem::PeriodicBandedMatrix k(nd, ops.space.bandwidth());
        std::vector<double> load;
        ops.stiffness_and_load(a_of_y, k, load);
        auto chi = fem::solve_pinned(k, load);
        ops.remove_mean(chi);
        out.a0 = ops.flux(a_of_y, chi);
        out.stationary = true;
        out.chi.emplace_back(ops.space, std::move(chi));
        return out;
    }

    const double theta = 1.0 / opt.n_s;
    fem::PeriodicBandedMatrix mass(nd, ops.space.bandwidth());
    fem::add_mass(ops.space, mass);

    // One factorization per step of the period, reused by every sweep.
    std::vector<fem::PeriodicLU> steps;
    std::vector<std::vector<double>> loads(static_cast<std::size_t>(opt.n_s) + 1);
    steps.reserve(static_cast<std::size_t>(opt.n_s));
    for (int k = 1; k <= opt.n_s; ++k) {
        const double s = k * theta;
        fem::PeriodicBandedMatrix system(nd, ops.space.bandwidth());
        fem::add_mass(ops.space, system, 1.0 / theta);
        ops.stiffness_and_load([&](double y) { return c(t, x, s, y); }, system, loads[static_cast<std::size_t>(k)]);
        steps.emplace_back(system);
    }

    std::vector<std::vector<double>> traj(static_cast<std::size_t>(opt.n_s) + 1, std::vector<double>(nd, 0.0));
    bool converged = false;
    for (int period = 1; period <= opt.max_periods && !converged; ++period) {
        if (period > 1) traj.front() = traj.back();
        for (int k = 1; k <= opt.n_s; ++k) {
            auto rhs = mass.multiply(traj[static_cast<std::size_t>(k) - 1]);
            const auto& load = loads[static_cast<std::size_t>(k)];
            for (std::size_t i = 0; i < nd; ++i) rhs[i] = rhs[i] / theta + load[i];
            auto next = steps[static_cast<std::size_t>(k) - 1].solve(rhs);
            ops.remove_mean(next);
            traj[static_cast<std::size_t>(k)] = std::move(next);
        }
        std::vector<double> diff(nd);
        for (std::size_t i = 0; i < nd; ++i) diff[i] = traj.back()[i] - traj.front()[i];
        converged = detail::l2_norm(mass, diff) <= opt.period_tol * detail::l2_norm(mass, traj.back());
        out.periods = period;
    }
    if (!converged)
        throw ConvergenceError("a0_oracle_periodic: no time-periodic state within " + std::to_string(opt.max_periods) +
                               " periods");
    log::debug("a0_oracle_periodic: converged after " + std::to_string(out.periods) + " periods");

    std::vector<double> flux(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double s = static_cast<double>(k) * theta;
        flux[k] = ops.flux([&](double y) { return c(t, x, s, y); }, traj[k]);
    }
    double sum = 0.5 * (flux.front() + flux.back());
    for (std::size_t k = 1; k + 1 < flux.size(); ++k) sum += flux[k];
    out.a0 = theta * sum;
    out.chi.reserve(traj.size());
    for (auto& v : traj) out.chi.emplace_back(ops.space, std::move(v));
    return out;
}

}  // namespace fehmm::micro
