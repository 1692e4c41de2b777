#pragma once

// Direct discretization of the oscillatory problem
//
//   d_t u - d_x ( a(t, x, t/eps^2, x/eps) d_x u ) = f,   u = 0 on the boundary,
//
// with P_p elements and implicit Euler. The coefficient is sampled at the 2p
// Gauss points of every element, so the grid has to resolve eps and eps^2 for
// the result to mean anything.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fehmm/coeff/coefficient.hpp"
#include "fehmm/coeff/expr.hpp"
#include "fehmm/error.hpp"
#include "fehmm/fem/assembly.hpp"
#include "fehmm/fem/banded.hpp"
#include "fehmm/fem/quadrature.hpp"
#include "fehmm/fem/space.hpp"
#include "fehmm/log.hpp"
#include "fehmm/trajectory.hpp"

namespace fehmm::fine {

struct FineConfig {
    double a = 0.0;
    double b = 1.0;
    double T = 1.0;
    double epsilon = 0.05;
    coeff::MultiscaleCoefficient coefficient = coeff::MultiscaleCoefficient::constant(1.0);
    coeff::Expr rhs = coeff::Expr::constant(0.0);
    coeff::Expr initial = coeff::Expr::constant(0.0);
    std::size_t n_elems = 64;
    std::size_t n_steps = 64;
    int degree = 1;
    std::size_t quadrature_points = 0;        // Gauss points per element for a^eps; 0 means 2p
    std::size_t store_every = 1;              // keep every k-th state (the last one always)
    std::size_t memory_cap_bytes = 1ull << 30;

    double h() const { return (b - a) / static_cast<double>(n_elems); }
    double tau() const { return T / static_cast<double>(n_steps); }
    bool resolved() const { return h() < epsilon && tau() < epsilon * epsilon; }

    fem::FeSpace space() const {
        return fem::FeSpace(fem::Mesh1D(a, b, n_elems), degree, fem::Boundary::dirichlet_zero);
    }

    std::size_t stored_states() const {
        const std::size_t every = store_every == 0 ? 1 : store_every;
        return 1 + n_steps / every + (n_steps % every != 0 ? 1 : 0);
    }

    /// Bytes held by the stored states plus the band matrices of one step.
    std::size_t memory_estimate() const {
        const std::size_t nd = n_elems * static_cast<std::size_t>(degree) + 1;
        const std::size_t band = 2 * static_cast<std::size_t>(degree) + 1;
        return sizeof(double) * (nd * stored_states() + 3 * nd * band);
    }

    void validate() const {
        if (!(T > 0.0) || n_elems == 0 || n_steps == 0) throw InputError("FineConfig: need T > 0, n_elems, n_steps > 0");
        if (!(epsilon > 0.0)) throw InputError("FineConfig: epsilon must be positive");
        if (degree < 1 || degree > 8) throw InputError("FineConfig: degree must be in 1..8");
        if (memory_estimate() > memory_cap_bytes)
            throw InputError("FineConfig: estimated memory " + std::to_string(memory_estimate()) +
                             " bytes exceeds the cap of " + std::to_string(memory_cap_bytes));
    }
};

inline MacroTrajectory run_fine(const FineConfig& cfg) {
    cfg.validate();
    const auto space = cfg.space();
    const double tau = cfg.tau();
    const double eps = cfg.epsilon;
    const auto& c = cfg.coefficient;
    const bool time_dependent = c.depends_on_t() || c.depends_on_s();
    const std::size_t every = cfg.store_every == 0 ? 1 : cfg.store_every;

    MacroTrajectory traj{space, tau, {}, {}, {}, {}, {}, 0, 0, cfg.resolved(), {}};
    if (!traj.resolved) {
        traj.note = "unresolved: h = " + std::to_string(cfg.h()) + ", tau = " + std::to_string(tau) +
                    " against eps = " + std::to_string(eps);
        log::warn("run_fine: " + traj.note);
    }

    fem::FeFunction u = fem::l2_project(space, [&](double x) { return cfg.initial.evaluate({0.0, x, 0.0, 0.0}); });
    traj.states.push_back(u);
    traj.steps.push_back(0);
    traj.times.push_back(0.0);

    const fem::BandedMatrix mass = fem::assemble_mass(space);
    std::optional<fem::BandedLU> lu;
    for (std::size_t n = 1; n <= cfg.n_steps; ++n) {
        const auto start = std::chrono::steady_clock::now();
        const double t = static_cast<double>(n) * tau;
        if (time_dependent || !lu) {
            fem::BandedMatrix system = mass;
            fem::add_stiffness(
                space, system, [&](double x) { return c(t, x, t / (eps * eps), x / eps); }, tau,
                cfg.quadrature_points);
            lu.emplace(std::move(system));
        }
        auto rhs = mass.multiply(u.coefficients());
        const auto load =
            fem::assemble_load(space, [&](double x) { return cfg.rhs.evaluate({t, x, 0.0, 0.0}); },
                               std::max<std::size_t>(2, static_cast<std::size_t>(cfg.degree) + 1));
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += tau * load[i];
        lu->solve_in_place(rhs);
        u.coefficients() = std::move(rhs);
        traj.step_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
        if (n % every == 0 || n == cfg.n_steps) {
            traj.states.push_back(u);
            traj.steps.push_back(n);
            traj.times.push_back(t);
        }
    }
    return traj;
}

struct Difference {
    double l2 = 0.0;
    double h1 = 0.0;  // H1 seminorm of the difference
};

/// Norms of coarse - fine, integrated on the fine mesh. The fine mesh must be
/// a uniform refinement of the coarse one.
inline Difference difference_on_nested(const fem::FeFunction& coarse, const fem::FeFunction& fine) {
    const auto& cm = coarse.space().mesh();
    const auto& fm = fine.space().mesh();
    if (std::abs(cm.a() - fm.a()) > 1e-14 || std::abs(cm.b() - fm.b()) > 1e-14 || fm.n_elems() % cm.n_elems() != 0)
        throw InputError("difference_on_nested: the fine grid does not refine the coarse grid");
    const std::size_t ratio = fm.n_elems() / cm.n_elems();
    const int pf = fine.space().degree();
    const int pc = coarse.space().degree();
    const auto rule = fem::gauss_legendre(static_cast<std::size_t>(std::max(pf, pc)) + 2);
    const double hf = fm.width();
    double l2 = 0.0, h1 = 0.0;
    for (std::size_t e = 0; e < fm.n_elems(); ++e) {
        const std::size_t ec = e / ratio;
        const double offset = static_cast<double>(e % ratio) / static_cast<double>(ratio);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double xi = rule.points[q];
            const double xi_c = offset + xi / static_cast<double>(ratio);
            const double dv = coarse.value(ec, xi_c) - fine.value(e, xi);
            const double dd = coarse.derivative(ec, xi_c) - fine.derivative(e, xi);
            l2 += hf * rule.weights[q] * dv * dv;
            h1 += hf * rule.weights[q] * dd * dd;
        }
    }
    return {std::sqrt(l2), std::sqrt(h1)};
}

/// Difference between an HMM (or any coarse) trajectory and a fine one at time t.
inline Difference compare_hmm_vs_fine(const MacroTrajectory& hmm, const MacroTrajectory& fine, double t) {
    const long i = hmm.index_at(t);
    const long j = fine.index_at(t);
    if (i < 0 || j < 0) throw InputError("compare_hmm_vs_fine: time " + std::to_string(t) + " not stored in both runs");
    return difference_on_nested(hmm.states[static_cast<std::size_t>(i)], fine.states[static_cast<std::size_t>(j)]);
}

}  // namespace fehmm::fine
