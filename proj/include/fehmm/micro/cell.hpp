#pragma once

// Micro cell problems on I_{delta,K} = x_K + delta * (-1/2, 1/2) over the time
// window (t_n, t_n + sigma), and the discrete homogenized coefficient A_{H,h}.
//
// With phi = Phi + eta, Phi linear with slope g and eta in the Dirichlet space,
// every implicit Euler step solves
//
//   (M / theta + K_k) eta_k = M eta_{k-1} / theta - g * int a_k z' dx,
//
// where a_k(x) = a(t_n, x_K, (t_n + k theta) / eps^2, x / eps): the slow slots
// stay collocated at (t_n, x_K).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fehmm/coeff/coefficient.hpp"
#include "fehmm/error.hpp"
#include "fehmm/fem/assembly.hpp"
#include "fehmm/fem/banded.hpp"
#include "fehmm/fem/norms.hpp"
#include "fehmm/fem/space.hpp"
#include "fehmm/log.hpp"

namespace fehmm::micro {

/// Smallest n with width / n <= step, tolerating round-off in width / step.
inline std::size_t snap_count(double width, double step) {
    const double r = width / step;
    const double n = std::ceil(r - 1e-9 * r);
    return static_cast<std::size_t>(std::max(1.0, n));
}

/// Geometry and discretization of one cell problem. The constructor snaps
/// h and theta down so that delta / h and sigma / theta are integers.
class CellConfig {
public:
    CellConfig(double t_n, double x_K, double delta, double sigma, double epsilon, double h, double theta, int degree,
               coeff::MultiscaleCoefficient coefficient)
        : t_n_(t_n), x_K_(x_K), delta_(delta), sigma_(sigma), epsilon_(epsilon), degree_(degree),
          coefficient_(std::move(coefficient)) {
        if (!(delta > 0.0) || !(sigma > 0.0) || !(epsilon > 0.0) || !(h > 0.0) || !(theta > 0.0))
            throw InputError("CellConfig: delta, sigma, epsilon, h, theta must be positive");
        if (!std::isfinite(t_n) || !std::isfinite(x_K)) throw InputError("CellConfig: non-finite collocation point");
        if (degree < 2) throw InputError("CellConfig: micro degree must be >= 2");
        n_elems_ = snap_count(delta, h);
        n_steps_ = snap_count(sigma, theta);
        if (delta < epsilon) log::warn("cell size delta is smaller than the period epsilon");
        if (sigma < epsilon * epsilon) log::warn("cell time sigma is smaller than epsilon^2");
    }

    double t_n() const noexcept { return t_n_; }
    double x_K() const noexcept { return x_K_; }
    double delta() const noexcept { return delta_; }
    double sigma() const noexcept { return sigma_; }
    double epsilon() const noexcept { return epsilon_; }
    double h() const noexcept { return delta_ / static_cast<double>(n_elems_); }
    double theta() const noexcept { return sigma_ / static_cast<double>(n_steps_); }
    int degree() const noexcept { return degree_; }
    std::size_t n_elems() const noexcept { return n_elems_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    const coeff::MultiscaleCoefficient& coefficient() const noexcept { return coefficient_; }

    CellConfig at(double t_n, double x_K) const {
        CellConfig c = *this;
        c.t_n_ = t_n;
        c.x_K_ = x_K;
        return c;
    }

    fem::FeSpace space() const {
        return fem::FeSpace(fem::Mesh1D(x_K_ - 0.5 * delta_, x_K_ + 0.5 * delta_, n_elems_), degree_,
                            fem::Boundary::dirichlet_zero);
    }

    /// a_{n,K}(t_n + s_k, x) for micro step k.
    double a(std::size_t k, double x) const {
        const double s = (t_n_ + static_cast<double>(k) * theta()) / (epsilon_ * epsilon_);
        return coefficient_(t_n_, x_K_, s, x / epsilon_);
    }

private:
    double t_n_, x_K_, delta_, sigma_, epsilon_;
    int degree_;
    std::size_t n_elems_ = 0, n_steps_ = 0;
    coeff::MultiscaleCoefficient coefficient_;
};

/// Trajectory of a discrete cell problem on an arbitrary interval.
struct CellTrajectory {
    fem::FeSpace space;
    double theta = 0.0;
    std::vector<std::vector<double>> eta;  // k = 0..n_steps, Dirichlet dofs
    std::vector<double> flux;              // S_k = int a_k (g + eta_k') dx
};

/// Implicit Euler on a Dirichlet P_p space. coef(k, x) gives the coefficient of
/// step k; time_dependent = false lets one factorization serve all steps.
template <class Coef>
CellTrajectory solve_cell_problem(const fem::FeSpace& space, double theta, std::size_t n_steps, Coef&& coef,
                                  bool time_dependent, double gradient = 1.0) {
    const int p = space.degree();
    const std::size_t nb = static_cast<std::size_t>(p) + 1;
    const fem::ShapeTable shape(p, 2 * static_cast<std::size_t>(p));
    const std::size_t nq = shape.rule.size();
    const double h = space.mesh().width();
    const std::size_t ne = space.mesh().n_elems();
    const std::size_t nd = space.n_dofs();

    std::vector<double> xq(ne * nq);
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t q = 0; q < nq; ++q) xq[e * nq + q] = space.mesh().map(e, shape.rule.points[q]);

    fem::BandedMatrix mass = fem::make_matrix(space);
    fem::add_mass(space, mass);

    std::vector<double> aq(ne * nq);
    const auto sample = [&](std::size_t k) {
        for (std::size_t i = 0; i < aq.size(); ++i) {
            aq[i] = coef(k, xq[i]);
            if (!std::isfinite(aq[i]) || !(aq[i] > 0.0))
                throw NumericalError("cell problem: coefficient not positive and finite at x = " + std::to_string(xq[i]));
        }
    };
    const auto flux_of = [&](const std::vector<double>& eta) {
        double s = 0.0;
        for (std::size_t e = 0; e < ne; ++e)
            for (std::size_t q = 0; q < nq; ++q) {
                double d = 0.0;
                for (std::size_t i = 0; i < nb; ++i) {
                    const long dof = space.element_dof(e, static_cast<int>(i));
                    if (dof >= 0) d += eta[static_cast<std::size_t>(dof)] * shape.deriv(q, i);
                }
                s += h * shape.rule.weights[q] * aq[e * nq + q] * (gradient + d / h);
            }
        return s;
    };

    std::optional<fem::BandedLU> lu;
    std::vector<double> load(nd);
    const auto assemble_step = [&]() {
        fem::BandedMatrix system = mass;
        system.scale(1.0 / theta);
        std::fill(load.begin(), load.end(), 0.0);
        std::vector<double> ke(nb * nb);
        for (std::size_t e = 0; e < ne; ++e) {
            std::fill(ke.begin(), ke.end(), 0.0);
            for (std::size_t q = 0; q < nq; ++q) {
                const double wa = shape.rule.weights[q] * aq[e * nq + q];
                for (std::size_t i = 0; i < nb; ++i) {
                    for (std::size_t j = 0; j < nb; ++j) ke[i * nb + j] += wa * shape.deriv(q, i) * shape.deriv(q, j) / h;
                }
            }
            for (std::size_t i = 0; i < nb; ++i) {
                const long di = space.element_dof(e, static_cast<int>(i));
                if (di < 0) continue;
                double li = 0.0;
                for (std::size_t q = 0; q < nq; ++q)
                    li += shape.rule.weights[q] * aq[e * nq + q] * shape.deriv(q, i);
                load[static_cast<std::size_t>(di)] -= gradient * li;
                for (std::size_t j = 0; j < nb; ++j) {
                    const long dj = space.element_dof(e, static_cast<int>(j));
                    if (dj >= 0) system.add(static_cast<std::size_t>(di), static_cast<std::size_t>(dj), ke[i * nb + j]);
                }
            }
        }
        lu.emplace(std::move(system));
    };

    CellTrajectory out{space, theta, {}, {}};
    out.eta.reserve(n_steps + 1);
    out.flux.reserve(n_steps + 1);
    out.eta.emplace_back(nd, 0.0);
    sample(0);
    out.flux.push_back(flux_of(out.eta.back()));

    for (std::size_t k = 1; k <= n_steps; ++k) {
        if (time_dependent || k == 1) {
            sample(k);
            assemble_step();
        }
        std::vector<double> rhs = mass.multiply(out.eta.back());
        for (std::size_t i = 0; i < nd; ++i) rhs[i] = rhs[i] / theta + load[i];
        lu->solve_in_place(rhs);
        out.eta.push_back(std::move(rhs));
        out.flux.push_back(flux_of(out.eta.back()));
    }
    return out;
}

/// eta_{h,k} for the unit macro gradient, k = 0..N_cell.
struct CellSolution {
    CellConfig config;
    std::vector<fem::FeFunction> eta;
    std::vector<double> flux;  // S_k
};

inline CellSolution solve_cell(const CellConfig& cfg, double gradient = 1.0) {
    const auto space = cfg.space();
    auto traj = solve_cell_problem(
        space, cfg.theta(), cfg.n_steps(), [&](std::size_t k, double x) { return cfg.a(k, x); },
        cfg.coefficient().depends_on_s(), gradient);
    CellSolution sol{cfg, {}, std::move(traj.flux)};
    sol.eta.reserve(traj.eta.size());
    for (auto& v : traj.eta) sol.eta.emplace_back(space, std::move(v));
    return sol;
}

/// Effective coefficient, stored as a d x d matrix (d = 1).
struct HomogenizedValue {
    double t_n = 0.0;
    double x_K = 0.0;
    static constexpr int dim = 1;
    std::array<double, dim * dim> a_eff{};

    double scalar() const noexcept { return a_eff[0]; }
};

/// Trapezoidal rule in time over the fluxes S_0 .. S_N, divided by sigma * delta.
inline double trapezoid_average(const std::vector<double>& flux, double theta, double sigma, double delta) {
    const std::size_t n = flux.size() - 1;
    double sum = 0.5 * (flux.front() + flux.back());
    for (std::size_t k = 1; k < n; ++k) sum += flux[k];
    return theta * sum / (sigma * delta);
}

inline HomogenizedValue homogenized_from(const CellSolution& sol) {
    const CellConfig& cfg = sol.config;
    const double value = trapezoid_average(sol.flux, cfg.theta(), cfg.sigma(), cfg.delta());
    const auto& c = cfg.coefficient();
    const double tol = 1e-8 * c.lambda_max();
    if (!(value >= c.lambda_min() - tol && value <= c.lambda_max() + tol)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "A_{H,h}(" << cfg.t_n() << ", " << cfg.x_K() << ") = " << value << " outside declared bounds ["
            << c.lambda_min() << ", " << c.lambda_max() << "]";
        throw NumericalError(msg.str());
    }
    HomogenizedValue out;
    out.t_n = cfg.t_n();
    out.x_K = cfg.x_K();
    out.a_eff[0] = value;
    return out;
}

inline HomogenizedValue assemble_Ahh(const CellConfig& cfg) { return homogenized_from(solve_cell(cfg)); }

/// Per-step ||d/dx (Phi + eta_k)|| and ||d/dx eta_k|| on the cell (unit slope Phi).
struct GradientHistory {
    double phi_norm = 0.0;             // ||Phi'|| = sqrt(delta)
    std::vector<double> total;         // ||(Phi + eta_k)'||
    std::vector<double> corrector;     // ||eta_k'||
};

inline GradientHistory gradient_history(const CellSolution& sol, double gradient = 1.0) {
    GradientHistory g;
    g.phi_norm = std::fabs(gradient) * std::sqrt(sol.config.delta());
    const auto& space = sol.config.space();
    const fem::ShapeTable shape(space.degree(), static_cast<std::size_t>(space.degree()) + 1);
    const double h = space.mesh().width();
    for (const auto& eta : sol.eta) {
        double tot = 0.0, cor = 0.0;
        for (std::size_t e = 0; e < space.mesh().n_elems(); ++e)
            for (std::size_t q = 0; q < shape.rule.size(); ++q) {
                double d = 0.0;
                for (std::size_t i = 0; i < shape.n_basis(); ++i) d += eta.local(e, static_cast<int>(i)) * shape.deriv(q, i);
                d /= h;
                const double w = h * shape.rule.weights[q];
                tot += w * (gradient + d) * (gradient + d);
                cor += w * d * d;
            }
        g.total.push_back(std::sqrt(tot));
        g.corrector.push_back(std::sqrt(cor));
    }
    return g;
}

}  // namespace fehmm::micro
