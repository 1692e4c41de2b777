#pragma once

// Deterministic text output: shortest round-trip decimals, '\n' line endings.

#include <charconv>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fehmm/analysis/errors.hpp"
#include "fehmm/analysis/rates.hpp"
#include "fehmm/micro/cell.hpp"
#include "fehmm/trajectory.hpp"

namespace fehmm::analysis {

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

inline constexpr const char* kRecordHeader =
    "run_id,example,epsilon,delta,sigma,H,h,tau,theta,err_l2,err_h1,err_triple,ehmm,wall_ms";

inline void write_record(std::ostream& os, const ErrorRecord& r) {
    os << r.run_id << ',' << r.example << ',' << format_double(r.epsilon) << ',' << format_optional(r.delta) << ','
       << format_optional(r.sigma) << ',' << format_double(r.H) << ',' << format_optional(r.h) << ','
       << format_double(r.tau) << ',' << format_optional(r.theta) << ',' << format_optional(r.err_l2) << ','
       << format_optional(r.err_h1) << ',' << format_optional(r.err_triple) << ',' << format_optional(r.ehmm) << ','
       << r.wall_ms << '\n';
}

inline void write_records(std::ostream& os, const std::vector<ErrorRecord>& records) {
    os << kRecordHeader << '\n';
    for (const auto& r : records) write_record(os, r);
}

/// Nodal values of every stored state: n, t_n, node_index, x, u.
inline void write_trajectory(std::ostream& os, const MacroTrajectory& traj) {
    os << "n,t_n,node_index,x,u\n";
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const auto values = traj.states[i].node_values();
        const std::string prefix = std::to_string(traj.steps[i]) + ',' + format_double(traj.times[i]) + ',';
        for (std::size_t j = 0; j < values.size(); ++j)
            os << prefix << j << ',' << format_double(traj.space.node_x(j)) << ',' << format_double(values[j]) << '\n';
    }
}

/// Cell trajectory: k, s_k, dof_index, x, eta_value (s_k is the micro time offset k theta).
inline void write_cell(std::ostream& os, const micro::CellSolution& sol) {
    os << "k,s_k,dof_index,x,eta_value\n";
    const auto space = sol.config.space();
    for (std::size_t k = 0; k < sol.eta.size(); ++k) {
        const std::string prefix =
            std::to_string(k) + ',' + format_double(static_cast<double>(k) * sol.config.theta()) + ',';
        const auto& c = sol.eta[k].coefficients();
        for (std::size_t j = 0; j < space.n_nodes(); ++j) {
            const long d = space.dof_of_node(j);
            if (d < 0) continue;
            os << prefix << d << ',' << format_double(space.node_x(j)) << ','
               << format_double(c[static_cast<std::size_t>(d)]) << '\n';
        }
    }
}

inline nlohmann::ordered_json fit_to_json(const RateFit& fit) {
    nlohmann::ordered_json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["window"] = fit.window;
    j["interval_slopes"] = fit.interval_slopes;
    return j;
}

}  // namespace fehmm::analysis
