#pragma once

// First-order reconstruction U_0 + eps U_1 with U_1(t, x) = dU_H/dx(x) chi(t/eps^2, x/eps),
// sampled as a P1 function on a uniform refinement of the macro mesh.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "fehmm/error.hpp"
#include "fehmm/fem/space.hpp"
#include "fehmm/micro/oracle.hpp"
#include "fehmm/trajectory.hpp"

namespace fehmm::analysis {

/// Maps a real number to its representative in Y = [-1/2, 1/2).
inline double to_unit_cell(double y) { return y - std::floor(y + 0.5); }

/// chi from the oracle: one entry for a stationary cell problem, otherwise
/// the orbit at s_k = k / n_s, k = 0..n_s (nearest sample in s is used).
inline fem::FeFunction corrector_diagnostic(const MacroTrajectory& traj, const micro::OracleResult& chi,
                                            double epsilon, std::size_t state_index, std::size_t refine) {
    if (state_index >= traj.states.size()) throw InputError("corrector_diagnostic: state index out of range");
    if (refine == 0) throw InputError("corrector_diagnostic: refinement factor must be positive");
    if (chi.chi.empty()) throw InputError("corrector_diagnostic: oracle result carries no corrector");
    const auto& u = traj.states[state_index];
    const auto& mesh = traj.space.mesh();
    const fem::FeSpace fine(fem::Mesh1D(mesh.a(), mesh.b(), mesh.n_elems() * refine), 1, traj.space.boundary());

    std::size_t k = 0;
    if (!chi.stationary) {
        const std::size_t n_s = chi.chi.size() - 1;
        const double s = traj.times[state_index] / (epsilon * epsilon);
        const double frac = s - std::floor(s);
        k = static_cast<std::size_t>(std::lround(frac * static_cast<double>(n_s))) % n_s;
    }
    const fem::FeFunction& corrector = chi.chi[k];

    fem::FeFunction out(fine);
    for (std::size_t j = 0; j < fine.n_nodes(); ++j) {
        const long d = fine.dof_of_node(j);
        if (d < 0) continue;
        const double x = fine.node_x(j);
        // Gradient from the macro element containing x (the right one at interior macro nodes).
        const std::size_t e = std::min(j / refine, mesh.n_elems() - 1);
        const double grad = u.derivative(e, 0.5);
        out.coefficients()[static_cast<std::size_t>(d)] = u(x) + epsilon * grad * corrector(to_unit_cell(x / epsilon));
    }
    return out;
}

}  // namespace fehmm::analysis
