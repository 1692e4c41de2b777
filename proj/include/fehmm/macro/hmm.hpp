#pragma once

// FE-HMM macro solver: P1 elements on (a, b), implicit Euler with step tau,
//
//   (M + tau B(t_n)) U^n = M U^{n-1} + tau F^n,   U^0 = Q_H u_0,
//
// where B(t_n) is the P1 stiffness with the per-element constant A_{H,h}(t_n, x_K)
// (one-point barycenter quadrature, exact for this integrand).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fehmm/coeff/coefficient.hpp"
#include "fehmm/coeff/expr.hpp"
#include "fehmm/error.hpp"
#include "fehmm/fem/assembly.hpp"
#include "fehmm/fem/banded.hpp"
#include "fehmm/fem/space.hpp"
#include "fehmm/log.hpp"
#include "fehmm/micro/cell.hpp"
#include "fehmm/micro/oracle.hpp"
#include "fehmm/parallel.hpp"
#include "fehmm/trajectory.hpp"

namespace fehmm::macro {

enum class CoefficientMode { hmm, fixed_a0, oracle_a0 };

inline std::string to_string(CoefficientMode m) {
    switch (m) {
        case CoefficientMode::hmm: return "hmm";
        case CoefficientMode::fixed_a0: return "fixed_a0";
        case CoefficientMode::oracle_a0: return "oracle_a0";
    }
    return {};
}

/// Resolved micro discretization shared by every cell problem.
struct MicroSettings {
    double delta = 0.1;
    double sigma = 0.01;
    double h = 0.1 / 512;
    double theta = 0.01 / 15;
    int degree = 2;
};

struct MacroConfig {
    double a = 0.0;
    double b = 1.0;
    double T = 1.0;
    std::size_t n_elems = 16;
    std::size_t n_steps = 15;
    double epsilon = 1e-3;
    MicroSettings micro;
    coeff::MultiscaleCoefficient coefficient = coeff::MultiscaleCoefficient::constant(1.0);
    coeff::Expr rhs = coeff::Expr::constant(0.0);      // f(t, x)
    coeff::Expr initial = coeff::Expr::constant(0.0);  // u_0(x)
    CoefficientMode mode = CoefficientMode::hmm;
    double fixed_a0 = 0.0;
    micro::OracleSettings oracle;
    int threads = 1;

    double H() const { return (b - a) / static_cast<double>(n_elems); }
    double tau() const { return T / static_cast<double>(n_steps); }

    fem::FeSpace space() const {
        return fem::FeSpace(fem::Mesh1D(a, b, n_elems), 1, fem::Boundary::dirichlet_zero);
    }

    micro::CellConfig cell(double t_n, double x_K) const {
        return micro::CellConfig(t_n, x_K, micro.delta, micro.sigma, epsilon, micro.h, micro.theta, micro.degree,
                                 coefficient);
    }

    void validate() const {
        if (!(T > 0.0) || n_elems == 0 || n_steps == 0) throw InputError("MacroConfig: need T > 0, n_elems, n_steps > 0");
        if (!(epsilon > 0.0)) throw InputError("MacroConfig: epsilon must be positive");
        if (mode == CoefficientMode::fixed_a0 && !(fixed_a0 > 0.0))
            throw InputError("MacroConfig: fixed_a0 value must be positive");
        if (mode == CoefficientMode::hmm && micro.delta > H())
            log::warn("cell size delta exceeds the macro mesh width H");
    }
};

/// Memoized effective coefficients keyed by (time level, element). When the
/// coefficient does not depend on t (or x), every time level (or element)
/// maps to the representative key of level 1 (or element 0).
class EffectiveCoefficientCache {
public:
    explicit EffectiveCoefficientCache(const MacroConfig& cfg) : cfg_(cfg) {}

    std::pair<std::size_t, std::size_t> key(std::size_t n, std::size_t K) const {
        return {cfg_.coefficient.depends_on_t() ? n : 1, cfg_.coefficient.depends_on_x() ? K : 0};
    }

    /// Per-element values at time level n (t_n = n tau).
    std::vector<double> level(std::size_t n) {
        const std::size_t ne = cfg_.n_elems;
        std::vector<double> out(ne);
        if (cfg_.mode == CoefficientMode::fixed_a0) {
            std::fill(out.begin(), out.end(), cfg_.fixed_a0);
            return out;
        }
        std::vector<std::size_t> missing;
        {
            std::lock_guard lock(mutex_);
            for (std::size_t K = 0; K < ne; ++K) {
                const auto k = key(n, K);
                auto it = table_.find(k);
                if (it != table_.end()) {
                    out[K] = it->second;
                    ++hits_;
                } else {
                    missing.push_back(K);
                }
            }
        }
        // Distinct representative keys among the misses.
        std::map<std::pair<std::size_t, std::size_t>, double> fresh;
        for (std::size_t K : missing) fresh.emplace(key(n, K), 0.0);
        std::vector<std::pair<std::size_t, std::size_t>> keys;
        for (const auto& kv : fresh) keys.push_back(kv.first);
        std::vector<double> values(keys.size());
        parallel_for(keys.size(), cfg_.threads, [&](std::size_t i) { values[i] = compute(keys[i].first, keys[i].second); });
        {
            std::lock_guard lock(mutex_);
            for (std::size_t i = 0; i < keys.size(); ++i) {
                table_[keys[i]] = values[i];
                fresh[keys[i]] = values[i];
            }
            misses_ += keys.size();
            hits_ += missing.size() - keys.size();
        }
        for (std::size_t K : missing) out[K] = fresh[key(n, K)];
        return out;
    }

    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }

private:
    double compute(std::size_t n, std::size_t K) const {
        const double t_n = static_cast<double>(n) * cfg_.tau();
        const double x_K = cfg_.space().mesh().barycenter(K);
        if (cfg_.mode == CoefficientMode::oracle_a0)
            return micro::a0_oracle_periodic(cfg_.coefficient, t_n, x_K, cfg_.oracle).a0;
        return micro::assemble_Ahh(cfg_.cell(t_n, x_K)).scalar();
    }

    const MacroConfig& cfg_;
    std::mutex mutex_;
    std::map<std::pair<std::size_t, std::size_t>, double> table_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

/// P1 stiffness with a constant coefficient per element, evaluated at the barycenter.
inline fem::BandedMatrix assemble_B(const fem::FeSpace& space, std::span<const double> a_per_element) {
    if (space.degree() != 1) throw InputError("assemble_B: macro space must be P1");
    if (a_per_element.size() != space.mesh().n_elems()) throw InputError("assemble_B: one value per element required");
    fem::BandedMatrix m = fem::make_matrix(space);
    const double H = space.mesh().width();
    fem::assemble_into(space, m, [&](std::size_t e, std::span<double> ke) {
        const double c = a_per_element[e] / H;
        ke[0] = c;
        ke[1] = -c;
        ke[2] = -c;
        ke[3] = c;
    });
    return m;
}

inline fem::BandedMatrix assemble_B(const MacroConfig& cfg, std::size_t n) {
    EffectiveCoefficientCache cache(cfg);
    const auto a = cache.level(n);
    return assemble_B(cfg.space(), a);
}

/// Load (f(t, .), phi_i) with 2-point Gauss per element.
inline std::vector<double> assemble_rhs(const fem::FeSpace& space, const coeff::Expr& f, double t) {
    return fem::assemble_load(space, [&](double x) { return f.evaluate({t, x, 0.0, 0.0}); }, 2);
}

/// Implicit Euler stepper for the macro system; the factorization is kept
/// while the per-element coefficients stay unchanged.
class MacroStepper {
public:
    MacroStepper(fem::FeSpace space, double tau) : space_(std::move(space)), tau_(tau), mass_(fem::assemble_mass(space_)) {}

    const fem::BandedMatrix& mass() const noexcept { return mass_; }

    std::vector<double> step(std::span<const double> previous, std::span<const double> a_per_element,
                             std::span<const double> load) {
        if (!lu_ || !std::equal(a_per_element.begin(), a_per_element.end(), current_a_.begin(), current_a_.end())) {
            fem::BandedMatrix system = mass_;
            system.axpy(tau_, assemble_B(space_, a_per_element));
            lu_.emplace(std::move(system));
            current_a_.assign(a_per_element.begin(), a_per_element.end());
        }
        auto rhs = mass_.multiply(previous);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += tau_ * load[i];
        lu_->solve_in_place(rhs);
        return rhs;
    }

private:
    fem::FeSpace space_;
    double tau_;
    fem::BandedMatrix mass_;
    std::optional<fem::BandedLU> lu_;
    std::vector<double> current_a_;
};

inline MacroTrajectory run_hmm(const MacroConfig& cfg) {
    cfg.validate();
    const auto space = cfg.space();
    const double tau = cfg.tau();
    MacroTrajectory traj{space, tau, {}, {}, {}, {}, {}, 0, 0, true, {}};
    traj.states.push_back(fem::l2_project(space, [&](double x) { return cfg.initial.evaluate({0.0, x, 0.0, 0.0}); }));
    traj.steps.push_back(0);
    traj.times.push_back(0.0);

    EffectiveCoefficientCache cache(cfg);
    MacroStepper stepper(space, tau);
    for (std::size_t n = 1; n <= cfg.n_steps; ++n) {
        const auto start = std::chrono::steady_clock::now();
        const double t_n = static_cast<double>(n) * tau;
        auto a = cache.level(n);
        const auto load = assemble_rhs(space, cfg.rhs, t_n);
        auto u = stepper.step(traj.states.back().coefficients(), a, load);
        traj.states.emplace_back(space, std::move(u));
        traj.steps.push_back(n);
        traj.times.push_back(t_n);
        traj.a_eff.push_back(std::move(a));
        traj.step_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    }
    traj.cache_hits = cache.hits();
    traj.cache_misses = cache.misses();
    log::info("run_hmm: " + std::to_string(traj.cache_misses) + " cell solves, " + std::to_string(traj.cache_hits) +
              " cache hits");
    return traj;
}

}  // namespace fehmm::macro
