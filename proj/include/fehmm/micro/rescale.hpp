#pragma once

// Change of variables s = (t - t_n) / eps^2, y = (x - x_K) / eps maps the cell
// problem on I_{delta,K} x (t_n, t_n + sigma) to one on I_{delta/eps} x
// (0, sigma/eps^2) with coefficient a(t_n, x_K, t_n/eps^2 + s, x_K/eps + y),
// and xi(s, y) = eta(t_n + eps^2 s, x_K + eps y) / eps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "fehmm/error.hpp"
#include "fehmm/micro/cell.hpp"

namespace fehmm::micro {

struct CellGrid {
    std::size_t n_elems = 0;
    std::size_t n_steps = 0;
};

struct RescaleReport {
    double max_rel_deviation = 0.0;
    CellGrid physical;
    CellGrid rescaled;
};

/// Solves the cell problem in physical and in rescaled coordinates and compares
/// eta / eps with xi node by node, relative to max |xi|. The rescaled grid is
/// snapped independently from (delta/eps, h/eps, sigma/eps^2, theta/eps^2)
/// unless an explicit grid is given; differing grids are an error.
inline RescaleReport rescaled_cell_check(const CellConfig& cfg, std::optional<CellGrid> rescaled_grid = {}) {
    const double eps = cfg.epsilon();
    const double eps2 = eps * eps;
    const double width = cfg.delta() / eps;
    const double duration = cfg.sigma() / eps2;
    const CellGrid grid = rescaled_grid.value_or(
        CellGrid{snap_count(width, cfg.h() / eps), snap_count(duration, cfg.theta() / eps2)});
    RescaleReport report{0.0, {cfg.n_elems(), cfg.n_steps()}, grid};
    if (grid.n_elems != cfg.n_elems() || grid.n_steps != cfg.n_steps())
        throw InputError("rescaled_cell_check: grid mismatch (" + std::to_string(cfg.n_elems()) + " x " +
                         std::to_string(cfg.n_steps()) + " physical vs " + std::to_string(grid.n_elems) + " x " +
                         std::to_string(grid.n_steps) + " rescaled)");

    const bool dep_s = cfg.coefficient().depends_on_s();
    const CellSolution physical = solve_cell(cfg);

    const fem::FeSpace rspace(fem::Mesh1D(-0.5 * width, 0.5 * width, grid.n_elems), cfg.degree(),
                              fem::Boundary::dirichlet_zero);
    const double theta_r = duration / static_cast<double>(grid.n_steps);
    const double s0 = cfg.t_n() / eps2;
    const double y0 = cfg.x_K() / eps;
    const auto& a = cfg.coefficient();
    const auto rescaled = solve_cell_problem(
        rspace, theta_r, grid.n_steps,
        [&](std::size_t k, double y) { return a(cfg.t_n(), cfg.x_K(), s0 + static_cast<double>(k) * theta_r, y0 + y); },
        dep_s);

    double max_xi = 0.0, max_dev = 0.0;
    for (std::size_t k = 0; k < rescaled.eta.size(); ++k) {
        const auto& xi = rescaled.eta[k];
        const auto& eta = physical.eta[k].coefficients();
        for (std::size_t i = 0; i < xi.size(); ++i) {
            max_xi = std::max(max_xi, std::fabs(xi[i]));
            max_dev = std::max(max_dev, std::fabs(eta[i] / eps - xi[i]));
        }
    }
    report.max_rel_deviation = max_xi > 0.0 ? max_dev / max_xi : max_dev;
    return report;
}

}  // namespace fehmm::micro
