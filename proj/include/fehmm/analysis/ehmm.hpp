#pragma once

// e(HMM) = max over time levels k and elements K of |A_0(t_k, x_K) - A_{H,h}(t_k, x_K)|.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "fehmm/macro/hmm.hpp"
#include "fehmm/micro/cell.hpp"
#include "fehmm/micro/oracle.hpp"
#include "fehmm/parallel.hpp"

namespace fehmm::analysis {

struct EhmmReport {
    double ehmm = 0.0;
    std::size_t argmax_step = 0;
    std::size_t argmax_element = 0;
    double a0 = 0.0;   // oracle value at the maximizer
    double ahh = 0.0;  // micro value at the maximizer
    std::size_t evaluations = 0;
};

/// Evaluates both coefficients at the representative (level, element) pairs
/// only: levels collapse when a does not depend on t, elements when it does
/// not depend on x.
inline EhmmReport ehmm_estimate(const macro::MacroConfig& cfg, const micro::OracleSettings& oracle) {
    const auto& c = cfg.coefficient;
    const std::size_t n_levels = c.depends_on_t() ? cfg.n_steps : 1;
    const std::size_t n_elems = c.depends_on_x() ? cfg.n_elems : 1;
    const auto mesh = cfg.space().mesh();
    std::vector<std::pair<std::size_t, std::size_t>> keys;
    for (std::size_t n = 0; n < n_levels; ++n)
        for (std::size_t K = 0; K < n_elems; ++K) keys.emplace_back(n + 1, K);

    std::vector<double> a0(keys.size()), ahh(keys.size());
    parallel_for(keys.size(), cfg.threads, [&](std::size_t i) {
        const double t_n = static_cast<double>(keys[i].first) * cfg.tau();
        const double x_K = mesh.barycenter(keys[i].second);
        a0[i] = micro::a0_oracle_periodic(c, t_n, x_K, oracle).a0;
        ahh[i] = micro::assemble_Ahh(cfg.cell(t_n, x_K)).scalar();
    });

    EhmmReport out;
    out.evaluations = keys.size();
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const double d = std::fabs(a0[i] - ahh[i]);
        if (i == 0 || d > out.ehmm) {
            out.ehmm = d;
            out.argmax_step = keys[i].first;
            out.argmax_element = keys[i].second;
            out.a0 = a0[i];
            out.ahh = ahh[i];
        }
    }
    return out;
}

}  // namespace fehmm::analysis
