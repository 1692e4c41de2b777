#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fehmm/error.hpp"
#include "fehmm/fem/assembly.hpp"
#include "fehmm/fem/norms.hpp"
#include "fehmm/fem/space.hpp"
#include "fehmm/trajectory.hpp"

namespace fehmm::analysis {

using SpaceTimeFn = std::function<double(double t, double x)>;

/// (sum_k tau ||Phi^k'||^2)^{1/2} over the given sequence (the caller passes k = 1..n).
inline double triple_norm(std::span<const fem::FeFunction> seq, double tau) {
    double s = 0.0;
    for (const auto& phi : seq) {
        const double g = fem::norms(phi).h1_semi;
        s += tau * g * g;
    }
    return std::sqrt(s);
}

/// Triple norm of a stored trajectory; state 0 is excluded and thinned storage
/// is weighted by the number of steps between stored states.
inline double triple_norm(const MacroTrajectory& traj) {
    double s = 0.0;
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        const double g = fem::norms(traj.states[i]).h1_semi;
        s += traj.tau * static_cast<double>(traj.steps[i] - traj.steps[i - 1]) * g * g;
    }
    return std::sqrt(s);
}

/// Fourth-order central difference in x, used when no analytic derivative is given.
inline double central_dx(const SpaceTimeFn& u, double t, double x, double step) {
    return (-u(t, x + 2 * step) + 8 * u(t, x + step) - 8 * u(t, x - step) + u(t, x - 2 * step)) / (12 * step);
}

struct ExactErrors {
    double err_l2 = 0.0;      // at the final time
    double err_h1 = 0.0;      // H1 seminorm at the final time
    double err_triple = 0.0;  // |||U_H - I_H U_0||| over k = 1..N
    double exact_l2 = 0.0;    // ||U_0(T)||, for relative errors
};

inline ExactErrors errors_vs_exact(const MacroTrajectory& traj, const SpaceTimeFn& exact,
                                   const std::optional<SpaceTimeFn>& exact_dx = std::nullopt) {
    if (traj.states.empty()) throw InputError("errors_vs_exact: empty trajectory");
    const auto& mesh = traj.space.mesh();
    const double step = 1e-3 * (mesh.b() - mesh.a());
    const double T = traj.final_time();
    const auto du = [&](double t, double x) { return exact_dx ? (*exact_dx)(t, x) : central_dx(exact, t, x, step); };

    ExactErrors out;
    const auto final_norms = fem::error_norms(
        traj.final_state(), [&](double x) { return exact(T, x); }, [&](double x) { return du(T, x); }, 4);
    out.err_l2 = final_norms.l2;
    out.err_h1 = final_norms.h1_semi;

    fem::FeFunction zero(traj.space);
    const auto ref = fem::error_norms(
        zero, [&](double x) { return exact(T, x); }, [](double) { return 0.0; }, 4);
    out.exact_l2 = ref.l2;

    double s = 0.0;
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        const double t = traj.times[i];
        const auto interp = fem::interpolate(traj.space, [&](double x) { return exact(t, x); });
        fem::FeFunction diff = traj.states[i];
        for (std::size_t d = 0; d < diff.coefficients().size(); ++d) diff.coefficients()[d] -= interp.coefficients()[d];
        const double g = fem::norms(diff).h1_semi;
        s += traj.tau * static_cast<double>(traj.steps[i] - traj.steps[i - 1]) * g * g;
    }
    out.err_triple = std::sqrt(s);
    return out;
}

/// One row of a convergence table. Parameters that do not apply to a run are left empty.
struct ErrorRecord {
    std::string run_id;
    std::string example;
    double epsilon = 0.0;
    std::optional<double> delta, sigma;
    double H = 0.0;
    std::optional<double> h;
    double tau = 0.0;
    std::optional<double> theta;
    std::optional<double> err_l2, err_h1, err_triple;
    std::optional<double> ehmm;
    long long wall_ms = 0;

    void check() const {
        for (const auto& v : {err_l2, err_h1, err_triple, ehmm})
            if (v && (!(*v >= 0.0) || !std::isfinite(*v)))
                throw NumericalError("ErrorRecord " + run_id + ": error values must be finite and non-negative");
    }
};

}  // namespace fehmm::analysis
