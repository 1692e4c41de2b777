#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fehmm/fem/space.hpp"

namespace fehmm {

/// Time-stepped FE solution. states[i] is the solution at times[i] (step
/// index steps[i]); macro runs keep every step, fine runs may thin them out.
struct MacroTrajectory {
    fem::FeSpace space;
    double tau = 0.0;
    std::vector<std::size_t> steps;
    std::vector<double> times;
    std::vector<fem::FeFunction> states;
    std::vector<double> step_ms;  // wall time per step, n = 1..N

    // HMM runs: effective coefficient per step (n = 1..N) and element.
    std::vector<std::vector<double>> a_eff;
    std::size_t cache_hits = 0;
    std::size_t cache_misses = 0;

    // Fine runs: whether the grid resolves the period (h < eps, tau < eps^2).
    bool resolved = true;
    std::string note;

    const fem::FeFunction& final_state() const { return states.back(); }
    double final_time() const { return times.back(); }

    /// Index of the stored state at time t, or -1.
    long index_at(double t) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return static_cast<long>(i);
        return -1;
    }
};

}  // namespace fehmm
